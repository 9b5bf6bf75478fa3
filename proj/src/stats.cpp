#include "ranksim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "ranksim/error.hpp"

namespace ranksim {

SampleSet::SampleSet(std::vector<double> v, std::string l)
    : values(std::move(v)), label(std::move(l)), effective_count(values.size()) {}

SampleSet::SampleSet(std::vector<double> v, std::string l, double thinning)
    : values(std::move(v)), label(std::move(l)) {
    const double f = std::clamp(thinning, 0.0, 1.0);
    effective_count = static_cast<std::size_t>(std::floor(f * static_cast<double>(values.size())));
    effective_count = std::max<std::size_t>(std::min<std::size_t>(1, values.size()), effective_count);
}

double SampleSet::mean() const { return ranksim::mean(values); }

double mean(std::span<const double> v) {
    if (v.empty()) throw ValidationError("mean of empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
    if (v.size() < 2) throw ValidationError("variance needs at least two samples");
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double sample_correlation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw ValidationError("correlation needs paired samples");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

double ks_distance(std::span<const double> samples, const std::function<double(double)>& cdf) {
    if (samples.empty()) throw ValidationError("ks_distance: empty sample set");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double F = cdf(sorted[i]);
        d = std::max({d, std::abs(static_cast<double>(i + 1) / n - F), std::abs(static_cast<double>(i) / n - F)});
    }
    return std::min(d, 1.0);
}

double ks_distance(const SampleSet& s, const std::function<double(double)>& cdf) { return ks_distance(s.values, cdf); }

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw ValidationError("ks_two_sample: empty sample set");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] == v) ++i;
        while (j < y.size() && y[j] == v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
    }
    return d;
}

std::vector<FitReport> fit_product_exp(const std::vector<SampleSet>& samples, const ProductExpLaw& law,
                                       const FitThresholds& thresholds) {
    if (samples.size() != law.dim()) throw ValidationError("fit_product_exp: dimension mismatch");
    std::vector<FitReport> out;
    out.reserve(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.values.empty()) throw ValidationError("fit_product_exp: coordinate " + std::to_string(i + 1) + " is empty");
        FitReport r;
        r.label = s.label;
        r.count = s.size();
        r.effective_count = s.effective_count;
        r.thresholds = thresholds;
        r.ks_distance = ks_distance(s, [&](double x) { return law.cdf(i, x); });
        r.sample_mean = s.mean();
        r.target_mean = law.mean(i);
        r.mean_rel_error = std::abs(r.sample_mean - r.target_mean) / r.target_mean;
        std::ostringstream os;
        os.precision(17);
        os << "Exp(" << law.rates()[i] << ")";
        r.target_law = os.str();
        r.pass = r.ks_distance < thresholds.ks && r.mean_rel_error < thresholds.mean_rel;
        out.push_back(std::move(r));
    }
    return out;
}

bool all_pass(const std::vector<FitReport>& reports) {
    return std::all_of(reports.begin(), reports.end(), [](const FitReport& r) { return r.pass; });
}

SlopeEstimate ols_slope(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) throw ValidationError("ols_slope: size mismatch");
    if (t.size() < 10) throw ValidationError("slope estimate needs at least 10 points in the window");
    const double n = static_cast<double>(t.size());
    const double mt = mean(t), my = mean(y);
    double stt = 0.0, sty = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        stt += (t[k] - mt) * (t[k] - mt);
        sty += (t[k] - mt) * (y[k] - my);
    }
    if (stt == 0.0) throw ValidationError("ols_slope: degenerate time window");
    SlopeEstimate e;
    e.points = t.size();
    e.slope = sty / stt;
    e.intercept = my - e.slope * mt;
    double rss = 0.0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        const double r = y[k] - e.intercept - e.slope * t[k];
        rss += r * r;
    }
    e.std_error = std::sqrt(rss / (n - 2.0) / stt);
    return e;
}

SlopeEstimate slope_estimate(const DiscretePath& path, std::size_t coordinate, double window_fraction) {
    if (coordinate >= path.dim()) throw ValidationError("slope_estimate: coordinate out of range");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) throw ValidationError("slope_estimate: window fraction must lie in (0, 1]");
    if (path.size() < 10) throw ValidationError("slope estimate needs at least 10 points in the window");
    const double t0 = path.time(0), t1 = path.time(path.size() - 1);
    const double from = t1 - window_fraction * (t1 - t0);
    std::vector<double> t, y;
    for (std::size_t k = 0; k < path.size(); ++k) {
        if (path.time(k) >= from) {
            t.push_back(path.time(k));
            y.push_back(path.at(k, coordinate));
        }
    }
    return ols_slope(t, y);
}

void write_ecdf_csv(std::ostream& os, std::span<const double> samples) {
    std::vector<double> s(samples.begin(), samples.end());
    std::sort(s.begin(), s.end());
    os << "x,F\n";
    const double n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i + 1 < s.size() && s[i + 1] == s[i]) continue;
        os << format_double(s[i]) << ',' << format_double(static_cast<double>(i + 1) / n) << '\n';
    }
}

} // namespace ranksim
