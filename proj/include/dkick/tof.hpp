#pragma once

#include <Eigen/Core>
#include <Eigen/QR>
#include <unsupported/Eigen/LevenbergMarquardt>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "constants.hpp"
#include "csv.hpp"
#include "ensemble.hpp"

namespace dkick {

struct ExpansionCurve {
    std::vector<double> times;
    std::vector<double> rms_sizes;
    std::vector<double> standard_errors;
    int axis = 0;

    void validate() const {
        std::size_t n = times.size();
        if (n < 3) throw std::invalid_argument("ExpansionCurve: need at least 3 points");
        if (rms_sizes.size() != n || standard_errors.size() != n)
            throw std::invalid_argument("ExpansionCurve: length mismatch");
        for (std::size_t i = 1; i < n; ++i)
            if (!(times[i] > times[i - 1])) throw std::invalid_argument("ExpansionCurve: times not increasing");
        for (double s : rms_sizes)
            if (!(s > 0.0)) throw std::invalid_argument("ExpansionCurve: sizes must be > 0");
        for (double s : standard_errors)
            if (!(s >= 0.0)) throw std::invalid_argument("ExpansionCurve: negative standard error");
    }
};

namespace detail {

/// Sample rms of values and its delete-one jackknife standard error.
inline std::pair<double, double> rms_with_jackknife(const std::vector<double>& v) {
    std::size_t n = v.size();
    if (n < 3) throw std::domain_error("jackknife needs n >= 3");
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(n);
    double s1 = 0.0, s2 = 0.0;
    for (double x : v) {
        double d = x - mean;
        s1 += d;
        s2 += d * d;
    }
    double full = std::sqrt(std::max(0.0, (s2 - s1 * s1 / n) / static_cast<double>(n - 1)));
    double nm1 = static_cast<double>(n - 1);
    double sum = 0.0, sum2 = 0.0;
    std::vector<double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        double d = v[i] - mean;
        double m = (s1 - d) / nm1;
        double ss = (s2 - d * d) - nm1 * m * m;
        loo[i] = std::sqrt(std::max(0.0, ss / (nm1 - 1.0)));
        sum += loo[i];
    }
    double avg = sum / static_cast<double>(n);
    for (double x : loo) sum2 += (x - avg) * (x - avg);
    return {full, std::sqrt(nm1 / static_cast<double>(n) * sum2)};
}

}  // namespace detail

/// Rms size of the ballistically expanded cloud at each delay, with jackknife errors.
inline ExpansionCurve expansion_curve(const Ensemble& e, const std::vector<double>& delays, int axis) {
    if (delays.size() < 3) throw std::invalid_argument("expansion_curve: need >= 3 delays");
    for (std::size_t i = 1; i < delays.size(); ++i)
        if (!(delays[i] > delays[i - 1])) throw std::invalid_argument("expansion_curve: delays not increasing");
    if (delays.front() < 0.0) throw std::invalid_argument("expansion_curve: negative delay");
    ExpansionCurve c;
    c.axis = axis;
    c.times = delays;
    c.rms_sizes.resize(delays.size());
    c.standard_errors.resize(delays.size());
    parallel_each(delays.size(), [&](std::size_t k) {
        std::vector<double> x(e.atoms.size());
        for (std::size_t i = 0; i < e.atoms.size(); ++i)
            x[i] = e.atoms[i].position[axis] + e.atoms[i].velocity[axis] * delays[k];
        auto [s, se] = detail::rms_with_jackknife(x);
        c.rms_sizes[k] = s;
        c.standard_errors[k] = se;
    });
    return c;
}

struct TemperatureFit {
    double temperature = 0.0;       // K, unconstrained best fit (may be negative)
    double sigma0 = 0.0;            // m
    double temperature_err = 0.0;   // K, 1 sigma
    double sigma0_err = 0.0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero();  // of (sigma0^2, k_B T / m)
    bool upper_limit = false;       // slope consistent with zero at 1 sigma
    double temperature_upper = 0.0; // K, slope + 1 sigma, meaningful when upper_limit
};

/// Weighted linear fit of sigma^2 = sigma0^2 + (k_B T/m) t^2 with weights 1/(2 sigma se)^2.
inline TemperatureFit fit_temperature(const ExpansionCurve& curve, const AtomSpecies& species) {
    curve.validate();
    std::size_t n = curve.times.size();
    std::vector<double> s(n), y(n), w(n);
    bool absolute = true;
    for (std::size_t i = 0; i < n; ++i)
        if (!(curve.standard_errors[i] > 0.0)) absolute = false;
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = curve.times[i] * curve.times[i];
        y[i] = curve.rms_sizes[i] * curve.rms_sizes[i];
        double e = 2.0 * curve.rms_sizes[i] * curve.standard_errors[i];
        w[i] = absolute ? 1.0 / (e * e) : 1.0;
    }
    double W = 0.0, sm = 0.0, ym = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        W += w[i];
        sm += w[i] * s[i];
        ym += w[i] * y[i];
    }
    sm /= W;
    ym /= W;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += w[i] * (s[i] - sm) * (s[i] - sm);
        sxy += w[i] * (s[i] - sm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw std::domain_error("fit_temperature: degenerate delays");
    double b = sxy / sxx;
    double a = ym - b * sm;
    double var_b = 1.0 / sxx;
    double var_a = 1.0 / W + sm * sm / sxx;
    double cov_ab = -sm / sxx;
    if (!absolute) {
        double chi2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double r = y[i] - a - b * s[i];
            chi2 += r * r;
        }
        double scale = n > 2 ? chi2 / static_cast<double>(n - 2) : 0.0;
        var_a *= scale;
        var_b *= scale;
        cov_ab *= scale;
    }
    TemperatureFit f;
    double m_over_k = species.mass() / constants.k_boltzmann;
    f.covariance << var_a, cov_ab, cov_ab, var_b;
    f.temperature = b * m_over_k;
    f.temperature_err = std::sqrt(var_b) * m_over_k;
    f.sigma0 = std::sqrt(std::max(0.0, a));
    f.sigma0_err = f.sigma0 > 0.0 ? std::sqrt(var_a) / (2.0 * f.sigma0) : std::sqrt(std::sqrt(var_a));
    double sb = std::sqrt(var_b);
    if (b - sb <= 0.0) {
        f.upper_limit = true;
        f.temperature_upper = (b + sb) * m_over_k;
    }
    return f;
}

inline void write_curve_csv(std::ostream& os, const ExpansionCurve& c) {
    CsvWriter w(os, {"t", "sigma", "sigma_err"});
    for (std::size_t i = 0; i < c.times.size(); ++i) w.row(c.times[i], c.rms_sizes[i], c.standard_errors[i]);
}

/// Projected 2D histogram; counts stored row-major with x fastest.
struct DensityImage {
    int nx = 0, ny = 0;
    double x_min = 0, x_max = 0, y_min = 0, y_max = 0;
    double blur = 0.0;
    std::vector<double> counts;

    double at(int ix, int iy) const { return counts[static_cast<std::size_t>(iy) * nx + ix]; }
    double total() const {
        double t = 0.0;
        for (double c : counts) t += c;
        return t;
    }
};

struct ImageWindow {
    double x_min, x_max, y_min, y_max;
};

namespace detail {

/// Discrete Gaussian kernel integrated over bins, offsets -k..k.
inline std::vector<double> bin_kernel(double blur, double width, int half) {
    std::vector<double> k(2 * half + 1);
    for (int d = -half; d <= half; ++d) {
        double a = (d - 0.5) * width / (blur * std::numbers::sqrt2);
        double b = (d + 0.5) * width / (blur * std::numbers::sqrt2);
        k[d + half] = 0.5 * (std::erf(b) - std::erf(a));
    }
    return k;
}

/// Blurs along one direction, renormalizing each source bin's kernel to the image so mass is kept.
inline void blur_lines(std::vector<double>& img, int nx, int ny, bool along_x, double blur, double width) {
    int len = along_x ? nx : ny;
    int lines = along_x ? ny : nx;
    int half = std::min(len, static_cast<int>(std::ceil(6.0 * blur / width)) + 1);
    auto kernel = bin_kernel(blur, width, half);
    std::vector<double> out(img.size(), 0.0);
    for (int l = 0; l < lines; ++l) {
        for (int i = 0; i < len; ++i) {
            std::size_t src = along_x ? static_cast<std::size_t>(l) * nx + i : static_cast<std::size_t>(i) * nx + l;
            double c = img[src];
            if (c == 0.0) continue;
            int lo = std::max(0, i - half), hi = std::min(len - 1, i + half);
            double norm = 0.0;
            for (int j = lo; j <= hi; ++j) norm += kernel[j - i + half];
            for (int j = lo; j <= hi; ++j) {
                std::size_t dst = along_x ? static_cast<std::size_t>(l) * nx + j : static_cast<std::size_t>(j) * nx + l;
                out[dst] += c * kernel[j - i + half] / norm;
            }
        }
    }
    img.swap(out);
}

}  // namespace detail

/// Histogram of positions on the (axis_x, axis_y) plane over a fixed window, blurred by a Gaussian of rms blur.
/// Atoms outside the window are dropped.
inline DensityImage density_image(const Ensemble& e, int axis_x, int axis_y, int nx, int ny, double blur,
                                  std::optional<ImageWindow> window = std::nullopt) {
    if (nx < 2 || ny < 2) throw std::invalid_argument("density_image: need >= 2 bins per axis");
    if (!(blur >= 0.0)) throw std::invalid_argument("density_image: negative blur");
    DensityImage img;
    img.nx = nx;
    img.ny = ny;
    img.blur = blur;
    if (window) {
        img.x_min = window->x_min;
        img.x_max = window->x_max;
        img.y_min = window->y_min;
        img.y_max = window->y_max;
    } else {
        double hx = 4.0 * (e.size() >= 2 ? cloud_size(e, axis_x) : 0.0);
        double hy = 4.0 * (e.size() >= 2 ? cloud_size(e, axis_y) : 0.0);
        double h = std::max({hx, hy, 1e-6});
        img.x_min = img.y_min = -h;
        img.x_max = img.y_max = h;
    }
    if (!(img.x_max > img.x_min && img.y_max > img.y_min)) throw std::invalid_argument("density_image: empty window");
    img.counts.assign(static_cast<std::size_t>(nx) * ny, 0.0);
    double wx = (img.x_max - img.x_min) / nx, wy = (img.y_max - img.y_min) / ny;
    for (const auto& a : e.atoms) {
        double fx = (a.position[axis_x] - img.x_min) / wx;
        double fy = (a.position[axis_y] - img.y_min) / wy;
        if (!(fx >= 0.0 && fx < nx && fy >= 0.0 && fy < ny)) continue;
        img.counts[static_cast<std::size_t>(fy) * nx + static_cast<std::size_t>(fx)] += 1.0;
    }
    if (blur > 0.0) {
        detail::blur_lines(img.counts, nx, ny, true, blur, wx);
        detail::blur_lines(img.counts, nx, ny, false, blur, wy);
    }
    return img;
}

inline void write_image(std::ostream& os, const DensityImage& img) {
    os << img.nx << ' ' << img.ny << '\n';
    os << format_number(img.x_max - img.x_min) << ' ' << format_number(img.y_max - img.y_min) << '\n';
    os << format_number(img.blur) << '\n';
    for (int iy = 0; iy < img.ny; ++iy) {
        for (int ix = 0; ix < img.nx; ++ix) os << (ix ? " " : "") << format_number(img.at(ix, iy));
        os << '\n';
    }
}

/// 1D density profile along axis: bin centers and counts over [-half_width, half_width] about center.
struct Profile {
    std::vector<double> x;
    std::vector<double> y;
};

inline Profile density_profile(const Ensemble& e, int axis, int bins, double half_width, double center = 0.0) {
    if (bins < 2 || !(half_width > 0.0)) throw std::invalid_argument("density_profile: bad binning");
    Profile p;
    p.x.resize(bins);
    p.y.assign(bins, 0.0);
    double w = 2.0 * half_width / bins;
    for (int i = 0; i < bins; ++i) p.x[i] = center - half_width + (i + 0.5) * w;
    for (const auto& a : e.atoms) {
        double f = (a.position[axis] - center + half_width) / w;
        if (f >= 0.0 && f < bins) p.y[static_cast<std::size_t>(f)] += 1.0;
    }
    return p;
}

struct GaussianComponent {
    double weight = 0.0;  // fraction of total area
    double width = 0.0;   // rms, m
};

struct BimodalFit {
    GaussianComponent narrow;
    GaussianComponent broad;
    double center = 0.0;
    double residual_norm = 0.0;
    bool unimodal = false;
    int evaluations = 0;
};

struct BimodalGuess {
    double narrow_width = 0.0;
    double broad_width = 0.0;
    double narrow_fraction = 0.3;
    double center = 0.0;
};

namespace detail {

struct TwoGaussianFunctor : Eigen::DenseFunctor<double> {
    const std::vector<double>& x;
    const std::vector<double>& y;
    TwoGaussianFunctor(const std::vector<double>& xs, const std::vector<double>& ys)
        : Eigen::DenseFunctor<double>(5, static_cast<int>(xs.size())), x(xs), y(ys) {}

    // p = (center, amp1, width1, amp2, width2)
    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double d = x[i] - p[0];
            double g1 = std::exp(-0.5 * d * d / (p[2] * p[2]));
            double g2 = std::exp(-0.5 * d * d / (p[4] * p[4]));
            f[i] = p[1] * g1 + p[3] * g2 - y[i];
        }
        return 0;
    }

    int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double d = x[i] - p[0];
            double g1 = std::exp(-0.5 * d * d / (p[2] * p[2]));
            double g2 = std::exp(-0.5 * d * d / (p[4] * p[4]));
            j(i, 0) = p[1] * g1 * d / (p[2] * p[2]) + p[3] * g2 * d / (p[4] * p[4]);
            j(i, 1) = g1;
            j(i, 2) = p[1] * g1 * d * d / (p[2] * p[2] * p[2]);
            j(i, 3) = g2;
            j(i, 4) = p[3] * g2 * d * d / (p[4] * p[4] * p[4]);
        }
        return 0;
    }
};

}  // namespace detail

/// Two-Gaussian mixture with a shared center, fitted by Levenberg-Marquardt from the given guesses.
inline BimodalFit fit_bimodal(const std::vector<double>& x, const std::vector<double>& y,
                              std::optional<BimodalGuess> guess = std::nullopt) {
    std::size_t n = x.size();
    if (n < 16 || y.size() != n) throw std::invalid_argument("fit_bimodal: need >= 16 samples");
    double total = 0.0, first = 0.0, peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(y[i] >= 0.0)) throw std::invalid_argument("fit_bimodal: profile must be nonnegative");
        total += y[i];
        first += y[i] * x[i];
        peak = std::max(peak, y[i]);
    }
    if (!(total > 0.0)) throw std::invalid_argument("fit_bimodal: empty profile");
    BimodalGuess g;
    if (guess) {
        g = *guess;
    } else {
        double mean = first / total, second = 0.0;
        for (std::size_t i = 0; i < n; ++i) second += y[i] * (x[i] - mean) * (x[i] - mean);
        double rms = std::sqrt(second / total);
        g.center = mean;
        g.broad_width = rms;
        g.narrow_width = rms / 3.0;
    }
    if (!(g.narrow_width > 0.0 && g.broad_width > 0.0)) throw std::invalid_argument("fit_bimodal: bad guess");
    // Dimensionless coordinates keep the damping well scaled.
    double xs = g.broad_width, ys = peak;
    std::vector<double> xn(n), yn(n);
    for (std::size_t i = 0; i < n; ++i) {
        xn[i] = (x[i] - g.center) / xs;
        yn[i] = y[i] / ys;
    }
    double wn = g.narrow_width / xs, wb = 1.0;
    double fn = std::clamp(g.narrow_fraction, 0.0, 1.0);
    // Peak heights from area fractions.
    double an = fn / wn, ab = (1.0 - fn) / wb;
    double hs = 1.0 / std::max(an + ab, 1e-300);
    Eigen::VectorXd p(5);
    p << 0.0, an * hs, wn, ab * hs, wb;
    detail::TwoGaussianFunctor functor(xn, yn);
    Eigen::LevenbergMarquardt<detail::TwoGaussianFunctor> lm(functor);
    lm.setFtol(1e-10);
    lm.setXtol(1e-10);
    lm.setMaxfev(200);
    lm.minimize(p);
    Eigen::VectorXd r(n);
    functor(p, r);
    BimodalFit out;
    out.center = g.center + p[0] * xs;
    out.residual_norm = r.norm() * ys;
    out.evaluations = static_cast<int>(lm.nfev());
    double w1 = std::abs(p[2]) * xs, w2 = std::abs(p[4]) * xs;
    double area1 = p[1] * std::abs(p[2]), area2 = p[3] * std::abs(p[4]);
    GaussianComponent c1{0.0, w1}, c2{0.0, w2};
    double sum = std::max(area1, 0.0) + std::max(area2, 0.0);
    if (sum > 0.0) {
        c1.weight = std::max(area1, 0.0) / sum;
        c2.weight = std::max(area2, 0.0) / sum;
    }
    if (w1 <= w2) {
        out.narrow = c1;
        out.broad = c2;
    } else {
        out.narrow = c2;
        out.broad = c1;
    }
    bool close = std::abs(out.broad.width - out.narrow.width) <= 0.05 * out.broad.width;
    out.unimodal = close || out.narrow.weight < 0.01 || out.broad.weight < 0.01 || area1 < 0.0 || area2 < 0.0;
    return out;
}

}  // namespace dkick
