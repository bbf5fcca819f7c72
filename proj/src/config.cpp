#include "cgolab/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "cgolab/faddeev.hpp"

namespace cgolab {

namespace pt = boost::property_tree;

namespace {

using Path = pt::ptree::path_type;

Path key(const std::string& section, const std::string& name) { return Path(section + "/" + name, '/'); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) {
        cur = trim(cur);
        if (!cur.empty()) out.push_back(cur);
    }
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw std::invalid_argument("config: cannot parse '" + t + "' as a number for " + what);
    return v;
}

long long parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long long v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size())
        throw std::invalid_argument("config: cannot parse '" + t + "' as an integer for " + what);
    return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
    if (t == "false" || t == "0" || t == "no" || t == "off") return false;
    throw std::invalid_argument("config: expected true/false for " + what + ", got '" + t + "'");
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split(text, ',')) out.push_back(parse_double(item, what));
    return out;
}

Vec3 parse_vec(const std::string& text, const std::string& what) {
    const auto v = parse_list(text, what);
    if (v.size() != 3) throw std::invalid_argument("config: " + what + " needs three comma-separated numbers");
    return {v[0], v[1], v[2]};
}

std::string fmt_list(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string fmt_vec(const Vec3& v) { return fmt_list({v.x, v.y, v.z}); }

std::string fmt_names(const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
}

// "gaussian cx cy cz width amplitude; bump ..." ; "none" for the zero potential.
std::vector<PhantomTerm> parse_terms(const std::string& text, const std::string& name) {
    std::vector<PhantomTerm> terms;
    if (trim(text) == "none" || trim(text).empty()) return terms;
    for (const auto& item : split(text, ';')) {
        std::istringstream is(item);
        std::string kind;
        is >> kind;
        std::vector<std::string> nums;
        for (std::string tok; is >> tok;) nums.push_back(tok);
        if (nums.size() != 5)
            throw std::invalid_argument("config: phantom '" + name +
                                        "' term needs 'kind cx cy cz width amplitude', got '" + item + "'");
        PhantomTerm t;
        if (kind == "gaussian") t.kind = PhantomTerm::Kind::gaussian;
        else if (kind == "bump") t.kind = PhantomTerm::Kind::bump;
        else throw std::invalid_argument("config: phantom '" + name + "' has unknown term kind '" + kind + "'");
        const std::string what = "phantom " + name;
        t.center = {parse_double(nums[0], what), parse_double(nums[1], what), parse_double(nums[2], what)};
        t.width = parse_double(nums[3], what);
        t.amplitude = parse_double(nums[4], what);
        if (!(t.width > 0.0)) throw std::invalid_argument("config: phantom '" + name + "' needs width > 0");
        terms.push_back(t);
    }
    return terms;
}

std::string fmt_terms(const std::vector<PhantomTerm>& terms) {
    if (terms.empty()) return "none";
    std::string s;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& t = terms[i];
        if (i) s += "; ";
        s += t.kind == PhantomTerm::Kind::gaussian ? "gaussian" : "bump";
        for (double v : {t.center.x, t.center.y, t.center.z, t.width, t.amplitude}) s += " " + format_double(v);
    }
    return s;
}

struct Binder {
    pt::ptree* tree = nullptr;        // writing
    const pt::ptree* src = nullptr;   // reading
    std::set<std::string> known;      // every bound "section/key"

    template <class Get, class Put>
    void field(const std::string& sec, const std::string& name, Get get, Put put) {
        known.insert(sec + "/" + name);
        if (tree) {
            tree->put(key(sec, name), get());
        } else if (auto v = src->get_optional<std::string>(key(sec, name))) {
            put(*v, sec + "." + name);
        }
    }
};

// One table of (section, key) bindings drives both serialization and parsing.
void bind_all(ExperimentConfig& c, Binder& b) {
    auto dbl = [&](const char* sec, const char* name, double& v) {
        b.field(sec, name, [&] { return format_double(v); },
                [&](const std::string& s, const std::string& w) { v = parse_double(s, w); });
    };
    auto integer = [&](const char* sec, const char* name, int& v) {
        b.field(sec, name, [&] { return std::to_string(v); },
                [&](const std::string& s, const std::string& w) { v = static_cast<int>(parse_int(s, w)); });
    };
    auto boolean = [&](const char* sec, const char* name, bool& v) {
        b.field(sec, name, [&] { return std::string(v ? "true" : "false"); },
                [&](const std::string& s, const std::string& w) { v = parse_bool(s, w); });
    };
    auto str = [&](const char* sec, const char* name, std::string& v) {
        b.field(sec, name, [&] { return v; }, [&](const std::string& s, const std::string&) { v = trim(s); });
    };
    auto vec = [&](const char* sec, const char* name, Vec3& v) {
        b.field(sec, name, [&] { return fmt_vec(v); },
                [&](const std::string& s, const std::string& w) { v = parse_vec(s, w); });
    };
    auto list = [&](const char* sec, const char* name, std::vector<double>& v) {
        b.field(sec, name, [&] { return fmt_list(v); },
                [&](const std::string& s, const std::string& w) { v = parse_list(s, w); });
    };
    auto names = [&](const char* sec, const char* name, std::vector<std::string>& v) {
        b.field(sec, name, [&] { return fmt_names(v); },
                [&](const std::string& s, const std::string&) { v = split(s, ','); });
    };

    integer("domain", "n", c.n);
    dbl("domain", "half_width", c.half_width);
    dbl("domain", "radius", c.radius);
    vec("domain", "center", c.center);

    dbl("cgo", "beta", c.beta);
    dbl("cgo", "eps0", c.eps0);
    list("cgo", "s", c.s_list);
    dbl("cgo", "tau", c.tau);
    integer("cgo", "u2_iters", c.u2_iters);
    dbl("cgo", "u2_tol", c.u2_tol);
    integer("cgo", "u2_restart", c.u2_restart);

    dbl("cutoffs", "r_cut_factor", c.r_cut_factor);
    dbl("cutoffs", "width_factor", c.width_factor);

    integer("sampling", "dirs", c.dirs);
    integer("sampling", "offsets", c.offsets);
    dbl("sampling", "margin", c.margin);
    integer("sampling", "mesh_theta", c.mesh_theta);
    integer("sampling", "mesh_phi", c.mesh_phi);
    integer("sampling", "interp_order", c.interp_order);

    names("estimates", "phantoms", c.est_phantoms);
    vec("estimates", "normal", c.est_normal);
    list("estimates", "offsets", c.est_offsets);
    boolean("estimates", "u2", c.est_u2);

    str("identity", "q1", c.id_q1);
    str("identity", "q2", c.id_q2);
    vec("identity", "normal", c.id_normal);
    list("identity", "offsets", c.id_offsets);
    boolean("identity", "u2", c.id_u2);

    str("reconstruct", "phantom", c.rec_phantom);
    str("reconstruct", "shifted", c.rec_shifted);
    boolean("reconstruct", "end_to_end", c.rec_e2e);
    integer("reconstruct", "e2e_dirs", c.rec_e2e_dirs);
    integer("reconstruct", "e2e_offsets", c.rec_e2e_offsets);
    boolean("reconstruct", "e2e_u2", c.rec_e2e_u2);
    boolean("reconstruct", "apodize", c.apodize);

    str("localize", "phantom", c.loc_phantom);
    str("localize", "touching", c.loc_touching);
    dbl("localize", "c_radius", c.loc_c_radius);
    dbl("localize", "r", c.loc_r);
    integer("localize", "dirs", c.loc_dirs);
    integer("localize", "offsets", c.loc_offsets);
    dbl("localize", "vanish_rel", c.loc_vanish_rel);
    str("localize", "route", c.loc_route);

    str("transform", "phantom", c.tr_phantom);

    b.field("run", "seed", [&] { return std::to_string(c.seed); },
            [&](const std::string& s, const std::string& w) {
                const long long v = parse_int(s, w);
                if (v < 0) throw std::invalid_argument("config: run.seed must be non-negative");
                c.seed = static_cast<std::uint64_t>(v);
            });

    auto& t = c.tol;
    dbl("tolerances", "slope_max", t.slope_max);
    dbl("tolerances", "uniform_factor", t.uniform_factor);
    dbl("tolerances", "uniform_s_min", t.uniform_s_min);
    dbl("tolerances", "support_leak", t.support_leak);
    dbl("tolerances", "green_rel", t.green_rel);
    dbl("tolerances", "conj_rel", t.conj_rel);
    dbl("tolerances", "conj_s", t.conj_s);
    dbl("tolerances", "identity_rel", t.identity_rel);
    dbl("tolerances", "offsupport_rel", t.offsupport_rel);
    dbl("tolerances", "zero_scale", t.zero_scale);
    dbl("tolerances", "fbp_rel", t.fbp_rel);
    dbl("tolerances", "e2e_rel", t.e2e_rel);
    dbl("tolerances", "peak_h", t.peak_h);
    dbl("tolerances", "dilate_h", t.dilate_h);
    dbl("tolerances", "depth_h", t.depth_h);
    dbl("tolerances", "trace_tol", t.trace_tol);
    dbl("tolerances", "deriv_tol", t.deriv_tol);
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw std::runtime_error("format_double failed");
    return std::string(buf, p);
}

std::map<std::string, Phantom> default_phantoms() {
    std::map<std::string, Phantom> m;
    m["zero"] = zero_phantom();
    m["centered"] = gaussian_phantom({0, 0, 0}, 0.3, 1.0, "centered");
    m["offset"] = gaussian_phantom({0.3, 0.2, 0.1}, 0.25, 1.0, "offset");
    m["fbp_gauss"] = gaussian_phantom({0, 0, 0}, 0.25, 1.0, "fbp_gauss");
    m["shifted"] = gaussian_phantom({0.2, -0.1, 0.15}, 0.25, 1.0, "shifted");
    m["contained"] = bump_phantom({0, 0, 0}, 0.3, 1.0, "contained");
    m["touching"] = bump_phantom({0.75, 0, 0}, 0.25, 1.0, "touching");
    return m;
}

ExperimentConfig::ExperimentConfig() : phantoms(default_phantoms()) {}

const Phantom& ExperimentConfig::phantom(const std::string& name) const {
    auto it = phantoms.find(name);
    if (it == phantoms.end()) throw std::invalid_argument("config: unknown phantom '" + name + "'");
    return it->second;
}

double ExperimentConfig::s_max() const {
    if (s_list.empty()) throw std::invalid_argument("config: cgo.s is empty");
    return *std::max_element(s_list.begin(), s_list.end());
}

void ExperimentConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
    const BallDomain dom = domain();  // geometry preconditions
    if (!(beta > 0.0 && beta < 0.25)) fail("cgo.beta must lie in (0, 1/4)");
    if (!(eps0 > 0.0 && eps0 < 2.0 * (0.25 - beta)))
        fail("cgo.eps0 must lie in (0, 2 (1/4 - beta)) = (0, " + format_double(2.0 * (0.25 - beta)) + ")");
    if (s_list.empty()) fail("cgo.s must list at least one value");
    for (double s : s_list) {
        if (!(s > 0.0)) fail("cgo.s values must be positive");
        const double delta = std::pow(s, -beta);
        for (double off : est_offsets)
            if (std::abs(off) + 2.0 * delta >= half_width)
                fail("estimates.offsets: plane offset " + format_double(off) + " with delta = s^-beta = " +
                     format_double(delta) + " leaves the box; increase half_width or s");
    }
    if (u2_iters < 1 || u2_restart < 1 || !(u2_tol > 0.0)) fail("cgo.u2_iters, u2_restart and u2_tol must be positive");
    if (!(r_cut_factor > 1.0)) fail("cutoffs.r_cut_factor must exceed 1 so chi0 = 1 on the disc");
    if (!(width_factor > 0.0)) fail("cutoffs.width_factor must be positive");
    if ((r_cut_factor + width_factor) * radius >= half_width)
        fail("cutoffs: r_cut + width must stay inside the box half-width");
    if (dirs < 1) fail("sampling.dirs must be positive");
    if (offsets < 1 || offsets % 2 == 0) fail("sampling.offsets must be odd");
    if (rec_e2e_offsets < 1 || rec_e2e_offsets % 2 == 0) fail("reconstruct.e2e_offsets must be odd");
    if (loc_offsets < 1 || loc_offsets % 2 == 0) fail("localize.offsets must be odd");
    if (rec_e2e_dirs < 1 || loc_dirs < 1) fail("reconstruct.e2e_dirs and localize.dirs must be positive");
    if (!(margin > 0.0)) fail("sampling.margin must be positive");
    if (mesh_theta < 2 || mesh_phi < 3) fail("sampling.mesh_theta >= 2 and mesh_phi >= 3 required");
    if (interp_order < 2 || interp_order > 8 || interp_order % 2) fail("sampling.interp_order must be 2, 4, 6 or 8");
    for (const auto& name : est_phantoms) phantom(name);
    for (const auto* name : {&id_q1, &id_q2, &rec_phantom, &rec_shifted, &loc_phantom, &loc_touching, &tr_phantom})
        phantom(*name);
    if (!(loc_c_radius > 0.0 && loc_c_radius < radius)) fail("localize.c_radius must lie in (0, radius)");
    if (!(loc_r > 0.0 && loc_r <= radius)) fail("localize.r must lie in (0, radius]");
    if (!(loc_vanish_rel > 0.0)) fail("localize.vanish_rel must be positive");
    if (loc_route != "direct" && loc_route != "boundary" && loc_route != "both")
        fail("localize.route must be direct, boundary or both");
    if (norm(est_normal) == 0.0 || norm(id_normal) == 0.0) fail("plane normals must be nonzero");
    (void)dom;
}

std::vector<std::string> ExperimentConfig::restrict_sweep() {
    const double h = 2.0 * half_width / n;
    std::vector<std::string> warnings;
    std::vector<double> kept;
    for (double s : s_list) {
        const bool wavelength_ok = 2.0 * std::numbers::pi / s >= 3.0 * h;
        const bool slab_ok = std::pow(s, -beta) >= 8.0 * h;
        if (wavelength_ok && slab_ok) {
            kept.push_back(s);
        } else {
            warnings.push_back("s = " + format_double(s) + " dropped: " +
                               (wavelength_ok ? "slab width s^-beta < 8h" : "wavelength 2pi/s < 3h") +
                               "; refine the grid (domain.n) to keep it");
        }
    }
    if (kept.empty()) throw std::invalid_argument("config: no s value satisfies the resolution constraints");
    s_list = kept;
    return warnings;
}

std::string to_ini(const ExperimentConfig& cfg) {
    pt::ptree tree;
    Binder b{&tree, nullptr};
    ExperimentConfig copy = cfg;
    bind_all(copy, b);
    for (const auto& [name, ph] : cfg.phantoms) tree.put(key("phantom:" + name, "terms"), fmt_terms(ph.terms));
    std::ostringstream os;
    pt::write_ini(os, tree);
    return os.str();
}

ExperimentConfig parse_ini(const std::string& text) {
    pt::ptree tree;
    std::istringstream is(text);
    try {
        pt::read_ini(is, tree);
    } catch (const pt::ini_parser_error& e) {
        throw std::invalid_argument(std::string("config: malformed INI: ") + e.what());
    }
    ExperimentConfig cfg;
    Binder b{nullptr, &tree};
    bind_all(cfg, b);
    for (const auto& [section, sub] : tree) {
        const bool phantom = section.rfind("phantom:", 0) == 0;
        if (sub.empty() && !sub.data().empty())
            throw std::invalid_argument("config: key '" + section + "' must be inside a [section]");
        for (const auto& kv : sub) {
            const bool ok = phantom ? kv.first == "terms" : b.known.count(section + "/" + kv.first) > 0;
            if (!ok) throw std::invalid_argument("config: unknown key '" + kv.first + "' in [" + section + "]");
        }
        if (!phantom) continue;
        const std::string name = section.substr(8);
        if (name.empty()) throw std::invalid_argument("config: phantom section needs a name");
        Phantom ph;
        ph.name = name;
        ph.terms = parse_terms(sub.get<std::string>("terms", "none"), name);
        cfg.phantoms[name] = ph;
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_ini(ss.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::string text = to_ini(cfg);
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(text.data(), text.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("config_hash: SHA-256 failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace cgolab
