#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ranksim/core_model.hpp"
#include "ranksim/ctmc.hpp"
#include "ranksim/diffusion.hpp"
#include "ranksim/stationary.hpp"
#include "ranksim/stats.hpp"

namespace ranksim {

using Json = nlohmann::ordered_json;

/// Malformed or schema-violating configuration (as opposed to well-formed but
/// invalid parameters, which raise ValidationError).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parameter set as written in a config: raw a_tilde or a (a, b, d) scheme.
struct ParamsSpec {
    SchemeSpec scheme;
    std::optional<std::int64_t> n;

    SystemParams params() const; // requires n
    SystemParams params(std::int64_t n_override) const;
};

/// {"K", "a_tilde", "n"} or {"scheme": {"a", "b", "d", "K"}, "n"}. n may be
/// absent when require_n is false.
ParamsSpec params_spec_from_json(const Json& j, bool require_n = true);
SystemParams params_from_json(const Json& j);
Json params_to_json(const SystemParams& p);
Json params_spec_to_json(const ParamsSpec& s);

/// {"K", "rho", "dt", "T", "seed", "Z0", "noise_scale"}; dt, seed, Z0 and noise_scale optional.
DiffusionConfig diffusion_config_from_json(const Json& j);
Json diffusion_config_to_json(const DiffusionConfig& c);

/// Keys W_mean, D_mean, R_W, R_D, D_stab, D_unst; undefined quantities are absent.
Json metrics_to_json(const MetricsReport& m);
Json fit_report_to_json(const FitReport& r);
Json law_to_json(const ProductExpLaw& law);
/// {"means", "counts", "params"}.
Json empirical_summary_to_json(const EmpiricalStationary& e);

/// Reads and parses a JSON file; ConfigError on I/O or syntax failure.
Json read_json_file(const std::string& path);

} // namespace ranksim
