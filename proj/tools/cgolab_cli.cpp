#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "cgolab/config.hpp"
#include "cgolab/pipeline.hpp"

using namespace cgolab;

namespace {

struct Common {
    std::string config;
    std::string out = "out";
    int workers = 1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool quiet = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "INI configuration file (defaults apply when omitted)");
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1, 256))->capture_default_str();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&c](const std::uint64_t& v) { c.seed = v, c.seed_set = true; }, "seed (overrides run.seed)");
    sub->add_flag("--quiet", c.quiet, "no progress output");
}

int run(const std::string& name, const Common& c) {
    ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
    if (c.seed_set) cfg.seed = c.seed;
    cfg.workers = c.workers;
    RunOptions opt{c.out, c.workers, !c.quiet};
    RunReport rep;
    if (name == "estimates") rep = run_estimates(cfg, opt);
    else if (name == "identity") rep = run_identity(cfg, opt);
    else if (name == "reconstruct") rep = run_reconstruct(cfg, opt);
    else if (name == "localize") rep = run_localize(cfg, opt);
    else rep = run_transform(cfg, opt);
    write_manifest(rep, cfg, opt);
    for (const auto& w : rep.warnings) std::cout << "warning: " << w << '\n';
    for (const auto& e : rep.errors) std::cout << "error: " << e << '\n';
    for (const auto& a : rep.assertions)
        std::cout << (a.passed ? "ok   " : "FAIL ") << a.name << " = " << a.value << " (" << a.relation << ' '
                  << a.threshold << ")\n";
    std::cout << name << ": " << rep.jobs_completed << '/' << rep.jobs_scheduled << " jobs, " << rep.wall_seconds
              << " s, config " << rep.config_hash.substr(0, 12) << ", " << (rep.ok() ? "OK" : "FAILED") << '\n';
    return rep.ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    cgolab::retain_large_allocations();
    CLI::App app{"CGO plane-integral experiments"};
    app.require_subcommand(1);
    Common c;
    const char* names[] = {"estimates", "identity", "reconstruct", "localize", "transform"};
    const char* help[] = {"residual estimates over the s sweep", "boundary identity against plane integrals",
                          "boundary data to potential via plane inversion", "support localization from plane families",
                          "direct plane-transform utilities"};
    for (int i = 0; i < 5; ++i) add_common(app.add_subcommand(names[i], help[i]), c);
    CLI11_PARSE(app, argc, argv);
    try {
        return run(app.get_subcommands().front()->get_name(), c);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
