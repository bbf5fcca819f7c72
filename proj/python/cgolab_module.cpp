#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <functional>
#include <map>

#include "cgolab/config.hpp"
#include "cgolab/pipeline.hpp"
#include "cgolab/transform.hpp"

namespace py = pybind11;
using namespace cgolab;

namespace {

ExperimentConfig from_text(const std::string& ini) { return ini.empty() ? ExperimentConfig() : parse_ini(ini); }

Vec3 vec(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

py::dict to_dict(const RunReport& rep) {
    py::list assertions;
    for (const Assertion& a : rep.assertions) {
        py::dict d;
        d["name"] = a.name;
        d["value"] = a.value;
        d["relation"] = a.relation;
        d["threshold"] = a.threshold;
        d["passed"] = a.passed;
        d["table"] = a.table;
        assertions.append(d);
    }
    py::dict scalars;
    for (const Scalar& s : rep.scalars) scalars[py::str(s.name)] = s.value;
    py::dict out;
    out["command"] = rep.command;
    out["ok"] = rep.ok();
    out["config_hash"] = rep.config_hash;
    out["out_dir"] = rep.out_dir;
    out["tables"] = rep.tables;
    out["dumps"] = rep.dumps;
    out["assertions"] = assertions;
    out["scalars"] = scalars;
    out["warnings"] = rep.warnings;
    out["errors"] = rep.errors;
    out["jobs_scheduled"] = rep.jobs_scheduled;
    out["jobs_completed"] = rep.jobs_completed;
    out["wall_seconds"] = rep.wall_seconds;
    return out;
}

}  // namespace

PYBIND11_MODULE(_cgolab, m) {
    m.doc() = "CGO plane-integral experiments";

    m.def("default_config", [] { return to_ini(ExperimentConfig()); }, "Default configuration as INI text.");

    m.def("config_hash", [](const std::string& ini) { return config_hash(from_text(ini)); }, py::arg("ini") = "");

    m.def(
        "validate_config",
        [](const std::string& ini) {
            ExperimentConfig c = from_text(ini);
            c.validate();
            return c.restrict_sweep();
        },
        py::arg("ini") = "", "Raises ValueError on invalid settings; returns sweep-restriction warnings.");

    m.def(
        "run",
        [](const std::string& command, const std::string& ini, const std::string& out_dir, int workers) {
            static const std::map<std::string, std::function<RunReport(const ExperimentConfig&, const RunOptions&)>>
                commands{{"estimates", run_estimates},
                         {"identity", run_identity},
                         {"reconstruct", run_reconstruct},
                         {"localize", run_localize},
                         {"transform", run_transform}};
            const auto it = commands.find(command);
            if (it == commands.end()) throw py::value_error("unknown command: " + command);
            ExperimentConfig cfg = from_text(ini);
            RunOptions opt;
            opt.out_dir = out_dir;
            opt.workers = workers;
            RunReport rep;
            {
                py::gil_scoped_release release;
                rep = it->second(cfg, opt);
                write_manifest(rep, cfg, opt);
            }
            return to_dict(rep);
        },
        py::arg("command"), py::arg("ini") = "", py::arg("out_dir") = "out", py::arg("workers") = 1);

    m.def(
        "phantom_value",
        [](const std::string& name, std::array<double, 3> x, const std::string& ini) {
            return from_text(ini).phantom(name)(vec(x));
        },
        py::arg("name"), py::arg("x"), py::arg("ini") = "");

    m.def(
        "plane_integral",
        [](const std::string& name, std::array<double, 3> normal, double offset, const std::string& ini) {
            const ExperimentConfig cfg = from_text(ini);
            const BallDomain dom = cfg.domain();
            const Phantom& q = cfg.phantom(name);
            return relative_plane_integral([&](const Vec3& x) { return cplx(q(x)); },
                                           Plane::from_normal(vec(normal), offset, dom.center()), dom);
        },
        py::arg("name"), py::arg("normal"), py::arg("offset"), py::arg("ini") = "",
        "Integral of a named phantom over the plane n.(x - c) = offset intersected with the domain ball.");

    m.def("cap_depth", &cap_depth, py::arg("r"), py::arg("R"));

    m.def("hemisphere_directions", [](int count) {
        std::vector<std::array<double, 3>> out;
        for (const Vec3& v : hemisphere_directions(count)) out.push_back({v.x, v.y, v.z});
        return out;
    });

    m.def(
        "read_field_dump",
        [](const std::string& path) {
            const GridField f = read_field_dump(path);
            const auto n = static_cast<py::ssize_t>(f.grid().n);
            py::array_t<std::complex<double>> a({n, n, n});
            auto* dst = a.mutable_data();
            for (std::size_t i = 0; i < f.size(); ++i) dst[i] = f[i];
            return a;
        },
        py::arg("path"), "Grid dump as a complex array indexed [k, j, i] (z, y, x).");
}
