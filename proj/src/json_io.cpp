#include "ranksim/json_io.hpp"

#include <cmath>
#include <fstream>

#include "ranksim/error.hpp"

namespace ranksim {

namespace {

const Json& require(const Json& j, const char* key, const char* where) {
    if (!j.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(std::string(where) + ": missing key \"" + key + "\"");
    return *it;
}

double as_double(const Json& v, const char* key) {
    if (!v.is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
    return v.get<double>();
}

std::int64_t as_int(const Json& v, const char* key) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw ConfigError(std::string("\"") + key + "\" must be an integer");
}

std::vector<double> as_vector(const Json& v, const char* key) {
    if (!v.is_array()) throw ConfigError(std::string("\"") + key + "\" must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_double(e, key));
    return out;
}

} // namespace

SystemParams ParamsSpec::params() const {
    if (!n) throw ConfigError("params: missing key \"n\"");
    return params(*n);
}

SystemParams ParamsSpec::params(std::int64_t n_override) const { return scheme.to_params(n_override); }

ParamsSpec params_spec_from_json(const Json& j, bool require_n) {
    if (!j.is_object()) throw ConfigError("params: expected a JSON object");
    ParamsSpec s;
    if (j.contains("scheme")) {
        const Json& sc = j["scheme"];
        const double a = as_double(require(sc, "a", "scheme"), "a");
        const int d = static_cast<int>(as_int(require(sc, "d", "scheme"), "d"));
        const int K = static_cast<int>(as_int(require(sc, "K", "scheme"), "K"));
        double b;
        if (sc.contains("b"))
            b = as_double(sc["b"], "b");
        else if (sc.contains("upsilon"))
            b = K * a - as_double(sc["upsilon"], "upsilon");
        else
            throw ConfigError("scheme: missing key \"b\"");
        s.scheme = SchemeSpec::d_scheme(K, a, b, d);
    } else {
        auto a_tilde = as_vector(require(j, "a_tilde", "params"), "a_tilde");
        if (j.contains("K")) {
            const auto K = as_int(j["K"], "K");
            if (K != static_cast<std::int64_t>(a_tilde.size()))
                throw ValidationError("[length]: a_tilde has " + std::to_string(a_tilde.size()) + " entries but K = " +
                                      std::to_string(K));
        }
        s.scheme = SchemeSpec::general(std::move(a_tilde));
    }
    if (j.contains("n"))
        s.n = as_int(j["n"], "n");
    else if (require_n)
        throw ConfigError("params: missing key \"n\"");
    return s;
}

SystemParams params_from_json(const Json& j) { return params_spec_from_json(j, true).params(); }

Json params_to_json(const SystemParams& p) {
    Json j;
    j["K"] = p.K();
    j["a_tilde"] = p.a_tilde();
    j["n"] = p.n();
    return j;
}

Json params_spec_to_json(const ParamsSpec& s) {
    Json j;
    if (s.scheme.kind == SchemeSpec::Kind::d_scheme) {
        j["scheme"] = Json{{"a", s.scheme.a}, {"b", s.scheme.b}, {"d", s.scheme.d}, {"K", s.scheme.K}};
    } else {
        j["K"] = s.scheme.size();
        j["a_tilde"] = s.scheme.a_tilde;
    }
    if (s.n) j["n"] = *s.n;
    return j;
}

DiffusionConfig diffusion_config_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("diffusion: expected a JSON object");
    DiffusionConfig c;
    if (j.contains("rho")) {
        c.rho = as_vector(j["rho"], "rho");
        c.K = static_cast<int>(c.rho.size());
        if (j.contains("K") && as_int(j["K"], "K") != c.K) throw ValidationError("diffusion: rho must have length K");
    } else {
        const auto s = params_spec_from_json(j, false);
        const auto a_tilde = s.scheme.expand();
        c.rho = drift_vector(a_tilde);
        c.K = static_cast<int>(a_tilde.size());
    }
    if (c.K < 1) throw ValidationError("diffusion: K must be >= 1");
    c.matrices = build_matrices(c.K);
    c.T = as_double(require(j, "T", "diffusion"), "T");
    if (j.contains("dt")) c.dt = as_double(j["dt"], "dt");
    if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(as_int(j["seed"], "seed"));
    if (j.contains("noise_scale")) c.noise_scale = as_double(j["noise_scale"], "noise_scale");
    c.Z0 = j.contains("Z0") ? as_vector(j["Z0"], "Z0") : std::vector<double>(static_cast<std::size_t>(c.K), 0.0);
    if (j.contains("refinement")) c.refinement = static_cast<int>(as_int(j["refinement"], "refinement"));
    if (j.contains("output_stride")) c.output_stride = static_cast<std::size_t>(as_int(j["output_stride"], "output_stride"));
    if (j.contains("burn_in")) c.average_from = as_double(j["burn_in"], "burn_in");
    c.validate();
    return c;
}

Json diffusion_config_to_json(const DiffusionConfig& c) {
    Json j;
    j["K"] = c.K;
    j["rho"] = c.rho;
    j["dt"] = c.dt;
    j["T"] = c.T;
    j["seed"] = c.seed;
    j["Z0"] = c.Z0;
    j["noise_scale"] = c.noise_scale;
    j["refinement"] = c.refinement;
    return j;
}

Json metrics_to_json(const MetricsReport& m) {
    Json j = Json::object();
    if (m.workload_mean) j["W_mean"] = *m.workload_mean;
    if (m.imbalance_mean) j["D_mean"] = *m.imbalance_mean;
    if (m.R_W) j["R_W"] = *m.R_W;
    if (m.R_D) j["R_D"] = *m.R_D;
    if (m.D_stab) j["D_stab"] = *m.D_stab;
    if (m.D_unst) j["D_unst"] = *m.D_unst;
    return j;
}

Json fit_report_to_json(const FitReport& r) {
    return Json{{"label", r.label},
                {"ks_distance", r.ks_distance},
                {"mean_rel_error", r.mean_rel_error},
                {"sample_mean", r.sample_mean},
                {"target_mean", r.target_mean},
                {"target_law", r.target_law},
                {"count", r.count},
                {"effective_count", r.effective_count},
                {"thresholds", Json{{"ks", r.thresholds.ks}, {"mean_rel", r.thresholds.mean_rel}}},
                {"pass", r.pass}};
}

Json law_to_json(const ProductExpLaw& law) { return Json{{"rates", law.rates()}, {"means", law.means()}}; }

Json empirical_summary_to_json(const EmpiricalStationary& e) {
    return Json{{"means", e.means}, {"counts", e.counts}, {"params", params_to_json(e.params)}};
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& ex) {
        throw ConfigError("cannot parse config file " + path + ": " + ex.what());
    }
}

} // namespace ranksim
