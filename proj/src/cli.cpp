#include "ranksim/cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <ctime>
#include <sstream>

#include <CLI11.hpp>
#include <openssl/evp.h>

#include "ranksim/ctmc.hpp"
#include "ranksim/diffusion.hpp"
#include "ranksim/error.hpp"
#include "ranksim/json_io.hpp"
#include "ranksim/parallel.hpp"
#include "ranksim/stationary.hpp"
#include "ranksim/stats.hpp"

namespace ranksim::cli {

namespace fs = std::filesystem;

namespace {

std::string sha256_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read back artifact " + file.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    return os.str();
}

// Collects artifacts written into the output directory.
class Artifacts {
public:
    explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

    std::ofstream open(const std::string& name) {
        std::ofstream f(dir_ / name, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
        names_.push_back(name);
        return f;
    }

    Json manifest() const {
        Json m = Json::array();
        for (const auto& n : names_)
            m.push_back(Json{{"file", n}, {"sha256", sha256_hex(dir_ / n)}, {"bytes", fs::file_size(dir_ / n)}});
        return m;
    }

    const fs::path& dir() const { return dir_; }

private:
    fs::path dir_;
    std::vector<std::string> names_;
};

struct Context {
    const Options& opts;
    Json config;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    Artifacts files;
    Json params = Json::object();
    Json results = Json::object();
    std::ostream& out;
};

double get_double(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) throw ConfigError(std::string("\"") + key + "\" must be a number");
    return j[key].get<double>();
}

double require_double(const Json& j, const char* key) {
    if (!j.contains(key)) throw ConfigError(std::string("missing key \"") + key + "\"");
    return get_double(j, key, 0.0);
}

int get_int(const Json& j, const char* key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_integer()) throw ConfigError(std::string("\"") + key + "\" must be an integer");
    return j[key].get<int>();
}

LabeledState get_initial(const Json& j) {
    LabeledState s;
    if (!j.contains("initial")) return s;
    if (!j["initial"].is_array()) throw ConfigError("\"initial\" must be an array of integers");
    for (const auto& v : j["initial"]) {
        if (!v.is_number_integer()) throw ConfigError("\"initial\" must be an array of integers");
        s.Q.push_back(v.get<std::int64_t>());
    }
    return s;
}

std::vector<std::int64_t> n_values(const Json& j, const ParamsSpec& spec) {
    std::vector<std::int64_t> ns;
    if (j.contains("n_list")) {
        if (!j["n_list"].is_array() || j["n_list"].empty()) throw ConfigError("\"n_list\" must be a nonempty array");
        for (const auto& v : j["n_list"]) {
            if (!v.is_number_integer()) throw ConfigError("\"n_list\" entries must be integers");
            ns.push_back(v.get<std::int64_t>());
        }
    } else if (spec.n) {
        ns.push_back(*spec.n);
    } else {
        throw ConfigError("missing key \"n\" (or \"n_list\")");
    }
    return ns;
}

FitThresholds get_thresholds(const Json& j, FitThresholds fallback) {
    if (!j.contains("thresholds")) return fallback;
    const Json& t = j["thresholds"];
    return {get_double(t, "ks", fallback.ks), get_double(t, "mean_rel", fallback.mean_rel)};
}

void write_samples_csv(std::ostream& os, const std::string& header, std::span<const double> v) {
    os << header << '\n';
    for (double x : v) os << format_double(x) << '\n';
}

DiscretePath queue_path(const Trajectory& t) {
    DiscretePath p(static_cast<std::size_t>(t.K()), {});
    std::vector<double> row(static_cast<std::size_t>(t.K()));
    for (std::size_t k = 0; k < t.states.size(); ++k) {
        for (std::size_t i = 0; i < row.size(); ++i) row[i] = static_cast<double>(t.states[k].Q[i]);
        p.push_back(t.sample_times[k], row);
    }
    return p;
}

void require_valid_or_throw(const SystemParams& p) { require_valid(p); }

// Thinning factor sample_dt / tau with tau = 4 / (lambda^2 Lambda_ii).
double thinning(double sample_dt, double rate, double lambda_ii) { return sample_dt * rate * rate * lambda_ii / 4.0; }

int cmd_validate(Context& c) {
    const auto spec = params_spec_from_json(c.config, true);
    const auto p = spec.params();
    c.params = params_to_json(p);
    const auto v = validate_params(p);
    c.results["valid"] = v.ok;
    if (!v.ok) {
        c.results["constraint"] = v.constraint;
        c.results["message"] = v.message;
        c.out << "invalid [" << v.constraint << "]: " << v.message << '\n';
        return exit_invalid;
    }
    const auto st = stability_check(p);
    c.results["n_star"] = p.n_star();
    c.results["upsilon"] = p.upsilon();
    c.results["a_star"] = p.a_star();
    c.results["routing_probabilities"] = routing_probabilities(p);
    c.results["drift"] = drift_vector(p);
    c.results["stable"] = st.stable;
    c.results["tail_sums"] = st.tail_sums;
    if (!c.opts.quiet) c.out << "valid; " << (st.stable ? "stable" : "unstable") << '\n';
    return exit_ok;
}

int cmd_simulate_ctmc(Context& c) {
    const auto p = params_from_json(c.config);
    require_valid_or_throw(p);
    c.params = params_to_json(p);
    const double T = require_double(c.config, "T");
    const double sample_dt = get_double(c.config, "sample_dt", 1.0);
    SimOptions so;
    so.record_events = c.config.value("record_events", false);
    const auto tr = simulate(p, get_initial(c.config), T, sample_dt, c.seed, so);

    {
        auto f = c.files.open("gaps.csv");
        diffusion_scale(tr).write_csv(f, "z");
    }
    {
        auto f = c.files.open("queues.csv");
        queue_path(tr).write_csv(f, "q");
    }
    {
        auto f = c.files.open("diagnostics.csv");
        write_diagnostics_csv(f, tr);
    }
    if (so.record_events) {
        auto f = c.files.open("events.csv");
        f << "t,queue,delta\n";
        for (const auto& e : tr.events) f << format_double(e.t) << ',' << e.queue + 1 << ',' << e.delta << '\n';
    }
    std::vector<double> idle;
    for (int i = 0; i < tr.K(); ++i) idle.push_back(idle_time(tr, i));
    c.results["T"] = T;
    c.results["sample_dt"] = sample_dt;
    c.results["event_count"] = tr.event_count;
    c.results["arrivals"] = tr.arrivals;
    c.results["departures"] = tr.departures;
    c.results["final_state"] = tr.final_state.Q;
    c.results["idle_time"] = idle;
    if (!c.opts.quiet) c.out << "simulated " << tr.event_count << " events\n";
    return exit_ok;
}

int cmd_simulate_diffusion(Context& c) {
    auto cfg = diffusion_config_from_json(c.config);
    cfg.seed = c.seed;
    c.params = diffusion_config_to_json(cfg);
    const auto res = simulate_reflected(cfg);
    {
        auto f = c.files.open("Z.csv");
        res.Z.write_csv(f, "z");
    }
    {
        auto f = c.files.open("L.csv");
        res.L.write_csv(f, "l");
    }
    const auto zl = res.Z.row(res.Z.size() - 1);
    const auto ll = res.L.row(res.L.size() - 1);
    c.results["time_average"] = res.time_average;
    c.results["average_from"] = cfg.average_from;
    c.results["Z_T"] = std::vector<double>(zl.begin(), zl.end());
    c.results["L_T"] = std::vector<double>(ll.begin(), ll.end());
    c.results["max_solver_iterations"] = res.max_solver_iterations;
    if (!c.opts.quiet) c.out << "simulated " << cfg.fine_steps() << " steps\n";
    return exit_ok;
}

EmpiricalStationary run_stationary(Context& c, const SystemParams& p, double& T, double& burn_in) {
    T = require_double(c.config, "T");
    burn_in = get_double(c.config, "burn_in", 0.1 * T);
    StationaryRunOptions so;
    so.sample_dt = get_double(c.config, "sample_dt", 1.0);
    so.threads = c.threads;
    so.initial = get_initial(c.config);
    const int reps = get_int(c.config, "replications", 1);
    return empirical_stationary(p, T, burn_in, reps, c.seed, so);
}

int cmd_stationary(Context& c) {
    const auto p = params_from_json(c.config);
    require_valid_or_throw(p);
    c.params = params_to_json(p);
    double T = 0, burn_in = 0;
    const auto emp = run_stationary(c, p, T, burn_in);
    const auto law = stationary_law(p);
    for (std::size_t i = 0; i < emp.coordinates.size(); ++i) {
        auto f = c.files.open("samples_z" + std::to_string(i + 1) + ".csv");
        write_samples_csv(f, "z" + std::to_string(i + 1), emp.coordinates[i].values);
    }
    c.results = empirical_summary_to_json(emp);
    c.results["law"] = law_to_json(law);
    Json fits = Json::array();
    for (const auto& r : fit_product_exp(emp.coordinates, law, get_thresholds(c.config, FitThresholds::ctmc())))
        fits.push_back(fit_report_to_json(r));
    c.results["fits"] = fits;
    c.results["replications"] = emp.replications;
    c.results["T"] = T;
    c.results["burn_in"] = burn_in;
    if (!c.opts.quiet) c.out << "pooled " << emp.counts.at(0) << " samples per coordinate\n";
    return exit_ok;
}

int cmd_metrics(Context& c) {
    const auto spec = params_spec_from_json(c.config, false);
    c.params = params_spec_to_json(spec);
    const auto m = metrics(spec.scheme);
    c.results = metrics_to_json(m);
    c.results["upsilon"] = m.upsilon;
    if (m.workload_from_law) c.results["W_from_law"] = *m.workload_from_law;
    if (!c.opts.quiet) c.out << c.results.dump() << '\n';
    return exit_ok;
}

int cmd_compare(Context& c) {
    const auto spec = params_spec_from_json(c.config, false);
    c.params = params_spec_to_json(spec);
    const auto thresholds = get_thresholds(c.config, FitThresholds::ctmc());
    bool pass = true;
    Json runs = Json::array();
    for (auto n : n_values(c.config, spec)) {
        const auto p = spec.params(n);
        require_valid_or_throw(p);
        double T = 0, burn_in = 0;
        const auto emp = run_stationary(c, p, T, burn_in);
        const auto law = stationary_law(p);
        const auto fits = fit_product_exp(emp.coordinates, law, thresholds);
        Json fj = Json::array();
        for (std::size_t i = 0; i < fits.size(); ++i) {
            fj.push_back(fit_report_to_json(fits[i]));
            auto f = c.files.open("ecdf_n" + std::to_string(n) + "_z" + std::to_string(i + 1) + ".csv");
            write_ecdf_csv(f, emp.coordinates[i].values);
        }
        const bool ok = all_pass(fits);
        pass = pass && ok;
        runs.push_back(Json{{"n", n}, {"summary", empirical_summary_to_json(emp)}, {"law", law_to_json(law)},
                            {"fits", fj}, {"pass", ok}});
        if (!c.opts.quiet) c.out << "n=" << n << (ok ? " pass\n" : " FAIL\n");
    }
    c.results["runs"] = runs;
    c.results["pass"] = pass;
    return pass ? exit_ok : exit_statistical;
}

int cmd_unstable(Context& c) {
    const auto p = params_from_json(c.config);
    require_valid_or_throw(p);
    c.params = params_to_json(p);
    const auto law = unstable_gap_law(p);
    const auto shape = *mjsq_shape(p.a_tilde());
    const double a = shape.first, b = shape.second;
    const int K = p.K();
    const double T = require_double(c.config, "T");
    const double window = get_double(c.config, "window_fraction", 0.5);
    if (!(window > 0.0 && window <= 1.0)) throw ValidationError("window_fraction must lie in (0, 1]");
    const double from = T * (1.0 - window);
    const double sample_dt = get_double(c.config, "sample_dt", 1.0);
    const int reps = get_int(c.config, "replications", 1);
    if (reps < 1) throw ValidationError("replications must be >= 1");

    std::vector<std::vector<std::vector<double>>> gaps(static_cast<std::size_t>(reps));
    std::vector<SlopeEstimate> slopes(static_cast<std::size_t>(reps));
    const auto initial = get_initial(c.config);
    parallel_for(gaps.size(), c.threads, [&](std::size_t r) {
        SimOptions so;
        so.stream = r;
        const auto g = diffusion_scale(simulate(p, initial, T, sample_dt, c.seed, so));
        slopes[r] = unstable_escape_slope(g);
        gaps[r] = collect_samples(g, from);
    });

    std::vector<SampleSet> sets;
    for (int i = 1; i < K; ++i) {
        std::vector<double> v;
        for (const auto& g : gaps) v.insert(v.end(), g[static_cast<std::size_t>(i)].begin(), g[static_cast<std::size_t>(i)].end());
        const double rate = law.rates()[static_cast<std::size_t>(i) - 1];
        sets.emplace_back(std::move(v), "z" + std::to_string(i + 1), thinning(sample_dt, rate, 4.0));
    }
    const auto fits = fit_product_exp(sets, law, get_thresholds(c.config, FitThresholds::ctmc()));
    Json fj = Json::array();
    for (std::size_t i = 0; i < fits.size(); ++i) {
        fj.push_back(fit_report_to_json(fits[i]));
        auto f = c.files.open("samples_z" + std::to_string(i + 2) + ".csv");
        write_samples_csv(f, sets[i].label, sets[i].values);
    }
    std::vector<double> slope_values;
    for (const auto& s : slopes) slope_values.push_back(s.slope);
    const double slope = mean(slope_values);
    const double target = b / K - a;
    const double slope_tol = get_double(c.config, "slope_rel_tol", 0.10);
    const bool slope_ok = std::abs(slope - target) <= slope_tol * std::abs(target);

    c.results["law"] = law_to_json(law);
    c.results["fits"] = fj;
    c.results["slope"] = slope;
    c.results["slopes"] = slope_values;
    c.results["slope_target"] = target;
    c.results["slope_liminf_bound"] = (b - K * a) / (2.0 * K);
    c.results["slope_pass"] = slope_ok;
    c.results["metrics"] = metrics_to_json(metrics(SchemeSpec::d_scheme(K, a, b, 1)));
    const bool pass = all_pass(fits) && slope_ok;
    c.results["pass"] = pass;
    if (!c.opts.quiet) c.out << "slope " << format_double(slope) << (pass ? " pass\n" : " FAIL\n");
    return pass ? exit_ok : exit_statistical;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

} // namespace

int run(const Options& opts, std::ostream& out, std::ostream& err) {
    static const std::map<std::string, int (*)(Context&)> commands = {
        {"validate", cmd_validate},   {"simulate-ctmc", cmd_simulate_ctmc}, {"simulate-diffusion", cmd_simulate_diffusion},
        {"stationary", cmd_stationary}, {"metrics", cmd_metrics},           {"compare", cmd_compare},
        {"unstable", cmd_unstable},
    };
    const auto it = commands.find(opts.command);
    if (it == commands.end()) {
        err << "unknown command: " << opts.command << '\n';
        return exit_config;
    }

    Json config;
    try {
        config = read_json_file(opts.config_path);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return exit_config;
    }

    std::error_code ec;
    fs::create_directories(opts.out_dir, ec);
    if (ec || !fs::is_directory(opts.out_dir)) {
        err << "output directory is not writable: " << opts.out_dir << '\n';
        return exit_config;
    }

    std::uint64_t seed = 0;
    if (opts.seed) {
        seed = *opts.seed;
    } else if (config.is_object() && config.contains("seed")) {
        if (!config["seed"].is_number_unsigned()) {
            err << "\"seed\" must be a nonnegative integer\n";
            return exit_config;
        }
        seed = config["seed"].get<std::uint64_t>();
    }

    std::ostringstream sink;
    Context ctx{opts, config, seed, opts.threads.value_or(default_thread_count()), Artifacts(opts.out_dir),
                Json::object(), Json::object(), opts.quiet ? static_cast<std::ostream&>(sink) : out};

    int code = exit_ok;
    try {
        code = it->second(ctx);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const ValidationError& e) {
        err << "validation failed: " << e.what() << '\n';
        return exit_invalid;
    } catch (const RegimeError& e) {
        err << "regime mismatch: " << e.what() << '\n';
        return exit_invalid;
    } catch (const SolverError& e) {
        err << "solver failure: " << e.what() << '\n';
        return exit_invalid;
    }

    Json summary{{"kind", opts.command},
                 {"params", ctx.params},
                 {"results", ctx.results},
                 {"manifest", ctx.files.manifest()},
                 {"seed", seed}};
    {
        std::ofstream f(fs::path(opts.out_dir) / "summary.json", std::ios::binary);
        f << summary.dump(2) << '\n';
    }
    {
        std::ofstream f(fs::path(opts.out_dir) / "metadata.json", std::ios::binary);
        f << Json{{"created_utc", utc_now()}, {"command", opts.command}, {"config", opts.config_path}}.dump(2) << '\n';
    }
    return code;
}

int main(int argc, char** argv) {
    CLI::App app{"rank-based load balancing simulator"};
    app.require_subcommand(1);
    Options opts;
    auto add = [&](const char* name, const char* help) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opts.config_path, "JSON config file")->required();
        sub->add_option("--out", opts.out_dir, "output directory");
        sub->add_option("--seed", opts.seed, "seed (overrides the config)");
        sub->add_option("--threads", opts.threads, "replication worker count");
        sub->add_flag("--quiet", opts.quiet, "suppress progress output");
        sub->callback([&opts, name] { opts.command = name; });
    };
    add("validate", "check a parameter set");
    add("simulate-ctmc", "simulate the queueing CTMC and write its gap path");
    add("simulate-diffusion", "simulate the reflected gap diffusion");
    add("stationary", "pooled stationary samples of the CTMC gaps");
    add("metrics", "closed-form workload and imbalance metrics");
    add("compare", "fit CTMC stationary samples against the product-form law");
    add("unstable", "gap law and escape slope in the unstable regime");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }
    return run(opts, std::cout, std::cerr);
}

} // namespace ranksim::cli
