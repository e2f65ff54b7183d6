#include <gtest/gtest.h>

#include <cmath>
#include <dkick/tof.hpp>
#include <sstream>

using namespace dkick;

namespace {

const AtomSpecies rb = AtomSpecies::rubidium85();

double v_thermal(double t) { return std::sqrt(constants.k_boltzmann * t / rb.mass()); }

ExpansionCurve exact_curve(double t, double sigma0, const std::vector<double>& times, double se) {
    ExpansionCurve c;
    c.times = times;
    double v = v_thermal(t);
    for (double s : times) {
        c.rms_sizes.push_back(std::sqrt(sigma0 * sigma0 + v * v * s * s));
        c.standard_errors.push_back(se);
    }
    return c;
}

std::vector<double> delays(double last, int n) {
    std::vector<double> d;
    for (int i = 0; i < n; ++i) d.push_back(last * i / (n - 1));
    return d;
}

Ensemble single_atom(Vec3 r) {
    Ensemble e;
    e.species = rb;
    e.atoms.push_back(Atom{r, Vec3::Zero(), 3});
    return e;
}

std::vector<double> mixture(const std::vector<double>& x, double f, double w1, double w2) {
    std::vector<double> y;
    for (double xi : x) {
        double g1 = std::exp(-0.5 * xi * xi / (w1 * w1)) / w1;
        double g2 = std::exp(-0.5 * xi * xi / (w2 * w2)) / w2;
        y.push_back(f * g1 + (1.0 - f) * g2);
    }
    return y;
}

std::vector<double> grid(double half, int n) {
    std::vector<double> x;
    for (int i = 0; i < n; ++i) x.push_back(-half + 2.0 * half * (i + 0.5) / n);
    return x;
}

}  // namespace

TEST(ExpansionCurve, ColdCloudIsFlat) {
    auto e = sample_ensemble(ThermalSpec::isotropic(0.0, 0.3e-3), 5000, rb, 1);
    auto c = expansion_curve(e, delays(20e-3, 5), 2);
    for (double s : c.rms_sizes) EXPECT_DOUBLE_EQ(s, c.rms_sizes.front());
    EXPECT_NEAR(c.rms_sizes.front() / 0.3e-3, 1.0, 0.05);
}

TEST(ExpansionCurve, AsymptoticSlopeIsThermalSpeed) {
    auto e = sample_ensemble(ThermalSpec::isotropic(1.2e-6, 0.1e-3), 100000, rb, 2);
    auto c = expansion_curve(e, {1.0, 1.5, 2.0}, 0);
    double slope = (c.rms_sizes[2] - c.rms_sizes[1]) / 0.5;
    EXPECT_NEAR(v_thermal(1.2e-6), 0.0108, 0.0001);
    EXPECT_NEAR(slope / v_thermal(1.2e-6), 1.0, 0.01);
}

TEST(ExpansionCurve, ColdKickedCloudBarelyExpands) {
    double sigma0 = 0.4e-3, t = 0.7e-6;
    auto e = sample_ensemble(ThermalSpec::isotropic(t, sigma0), 20000, rb, 3);
    auto c = expansion_curve(e, delays(20e-3, 8), 2);
    double bound = std::sqrt(sigma0 * sigma0 + std::pow(v_thermal(t) * 20e-3, 2)) - sigma0;
    EXPECT_LE(c.rms_sizes.back() - c.rms_sizes.front(), 1.1 * bound);
}

TEST(ExpansionCurve, InvalidDelaysThrow) {
    auto e = sample_ensemble(ThermalSpec::isotropic(1e-6, 0.1e-3), 100, rb, 1);
    EXPECT_THROW(expansion_curve(e, {0.0, 1e-3}, 2), std::invalid_argument);
    EXPECT_THROW(expansion_curve(e, {0.0, 2e-3, 1e-3}, 2), std::invalid_argument);
}

TEST(ExpansionCurve, SizeSquaredConvexInTimeSquared) {
    auto e = sample_ensemble(ThermalSpec::isotropic(7.5e-6, 0.25e-3), 20000, rb, 4);
    auto c = expansion_curve(e, delays(20e-3, 9), 1);
    for (std::size_t i = 1; i < c.times.size(); ++i) EXPECT_GE(c.rms_sizes[i], c.rms_sizes[i - 1]);
    // sigma^2 is exactly affine in t^2 for each sample, so second differences vanish
    for (std::size_t i = 1; i + 1 < c.times.size(); ++i) {
        double s0 = c.times[i - 1] * c.times[i - 1], s1 = c.times[i] * c.times[i], s2 = c.times[i + 1] * c.times[i + 1];
        double y0 = c.rms_sizes[i - 1] * c.rms_sizes[i - 1], y1 = c.rms_sizes[i] * c.rms_sizes[i];
        double y2 = c.rms_sizes[i + 1] * c.rms_sizes[i + 1];
        double curvature = (y2 - y1) / (s2 - s1) - (y1 - y0) / (s1 - s0);
        EXPECT_GE(curvature, -1e-9 * (y2 - y0) / (s2 - s0));
    }
}

TEST(FitTemperature, NoiselessInversion) {
    auto c = exact_curve(7.5e-6, 0.25e-3, delays(20e-3, 8), 1e-6);
    auto f = fit_temperature(c, rb);
    EXPECT_NEAR(f.temperature / 7.5e-6, 1.0, 1e-10);
    EXPECT_NEAR(f.sigma0 / 0.25e-3, 1.0, 1e-10);
    EXPECT_FALSE(f.upper_limit);
}

TEST(FitTemperature, NoiselessWithoutErrorsUsesUnitWeights) {
    auto c = exact_curve(2e-6, 0.1e-3, delays(15e-3, 5), 0.0);
    auto f = fit_temperature(c, rb);
    EXPECT_NEAR(f.temperature / 2e-6, 1.0, 1e-10);
    EXPECT_NEAR(f.sigma0 / 0.1e-3, 1.0, 1e-10);
}

TEST(FitTemperature, MonteCarloRecoversTruth) {
    auto e = sample_ensemble(ThermalSpec::isotropic(7.5e-6, 0.25e-3), 100000, rb, 5);
    auto f = fit_temperature(expansion_curve(e, delays(20e-3, 8), 2), rb);
    EXPECT_NEAR(f.temperature / 7.5e-6, 1.0, 0.02);
}

TEST(FitTemperature, SevenHundredNanokelvinIsAnUpperLimitRegime) {
    auto e = sample_ensemble(ThermalSpec::isotropic(0.7e-6, 0.4e-3), 5000, rb, 6);
    auto f = fit_temperature(expansion_curve(e, delays(20e-3, 8), 2), rb);
    EXPECT_GT(f.temperature_err / 0.7e-6, 0.10);
}

TEST(FitTemperature, FlatCurveReportsUpperLimit) {
    ExpansionCurve c;
    c.times = delays(20e-3, 6);
    c.rms_sizes = {4.0e-4, 4.003e-4, 3.998e-4, 4.001e-4, 3.999e-4, 4.002e-4};
    c.standard_errors.assign(6, 3e-7);
    auto f = fit_temperature(c, rb);
    EXPECT_TRUE(f.upper_limit);
    EXPECT_GT(f.temperature_upper, f.temperature);
    EXPECT_GT(f.temperature_upper, 0.0);
    EXPECT_NEAR(f.temperature_upper - f.temperature, f.temperature_err, 1e-12 * f.temperature_err + 1e-30);
}

TEST(FitTemperature, InvariantUnderErrorRescaling) {
    auto e = sample_ensemble(ThermalSpec::isotropic(3e-6, 0.2e-3), 5000, rb, 7);
    auto c = expansion_curve(e, delays(20e-3, 6), 0);
    auto scaled = c;
    for (double& s : scaled.standard_errors) s *= 7.3;
    auto a = fit_temperature(c, rb), b = fit_temperature(scaled, rb);
    EXPECT_NEAR(a.temperature / b.temperature, 1.0, 1e-10);
    EXPECT_NEAR(a.sigma0 / b.sigma0, 1.0, 1e-10);
}

TEST(FitTemperature, InvalidCurveThrows) {
    ExpansionCurve c;
    c.times = {0.0, 1e-3};
    c.rms_sizes = {1e-4, 1e-4};
    c.standard_errors = {1e-6, 1e-6};
    EXPECT_THROW(fit_temperature(c, rb), std::invalid_argument);
    c = exact_curve(1e-6, 1e-4, {0.0, 1e-3, 2e-3}, 1e-6);
    c.rms_sizes[1] = -1.0;
    EXPECT_THROW(fit_temperature(c, rb), std::invalid_argument);
}

TEST(ExpansionCurve, CsvHeader) {
    std::ostringstream os;
    write_curve_csv(os, exact_curve(1e-6, 1e-4, {0.0, 1e-3, 2e-3}, 1e-6));
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "t,sigma,sigma_err");
}

TEST(DensityImage, SingleAtomOneBin) {
    auto img = density_image(single_atom(Vec3(1e-4, 0.0, -2e-4)), 0, 2, 16, 16, 0.0, ImageWindow{-1e-3, 1e-3, -1e-3, 1e-3});
    int nonzero = 0;
    for (double c : img.counts) nonzero += c != 0.0;
    EXPECT_EQ(nonzero, 1);
    EXPECT_EQ(img.at(8, 6), 1.0);
}

TEST(DensityImage, BlurConservesCounts) {
    auto e = sample_ensemble(ThermalSpec::isotropic(1e-6, 0.2e-3), 20000, rb, 8);
    ImageWindow w{-2e-3, 2e-3, -2e-3, 2e-3};
    auto img = density_image(e, 0, 1, 64, 64, 50e-6, w);
    EXPECT_NEAR(img.total(), 20000.0, 1e-7);
}

TEST(DensityImage, MarginalRmsMatchesCloudSize) {
    auto e = sample_ensemble(ThermalSpec::isotropic(1e-6, 0.3e-3), 50000, rb, 9);
    auto img = density_image(e, 0, 1, 80, 80, 0.0, ImageWindow{-2e-3, 2e-3, -2e-3, 2e-3});
    double width = 4e-3 / 80;
    double s = 0.0, s2 = 0.0, t = 0.0;
    for (int ix = 0; ix < img.nx; ++ix) {
        double col = 0.0;
        for (int iy = 0; iy < img.ny; ++iy) col += img.at(ix, iy);
        double x = -2e-3 + (ix + 0.5) * width;
        s += col * x;
        s2 += col * x * x;
        t += col;
    }
    double mean = s / t;
    double rms = std::sqrt(s2 / t - mean * mean);
    EXPECT_LE(std::abs(rms - cloud_size(e, 0)), 0.5 * width);
}

TEST(DensityImage, TranslationEquivariance) {
    auto e = sample_ensemble(ThermalSpec::isotropic(1e-6, 0.2e-3), 5000, rb, 10);
    ImageWindow w{-1.0e-3, 1.0e-3, -1.0e-3, 1.0e-3};
    int n = 40;
    double width = 2e-3 / n;
    auto shifted = e;
    for (auto& a : shifted.atoms) a.position.x() += width;
    auto a = density_image(e, 0, 1, n, n, 0.0, w);
    auto b = density_image(shifted, 0, 1, n, n, 0.0, w);
    int mismatched = 0, compared = 0;
    for (int iy = 0; iy < n; ++iy)
        for (int ix = 0; ix + 1 < n; ++ix) {
            ++compared;
            mismatched += a.at(ix, iy) != b.at(ix + 1, iy);
        }
    // only atoms sitting within rounding of a bin edge can disagree
    EXPECT_LE(mismatched, compared / 200);
}

TEST(DensityImage, InvalidArgumentsThrow) {
    auto e = single_atom(Vec3::Zero());
    EXPECT_THROW(density_image(e, 0, 1, 1, 8, 0.0), std::invalid_argument);
    EXPECT_THROW(density_image(e, 0, 1, 8, 8, -1.0), std::invalid_argument);
}

TEST(DensityImage, TextExportHeader) {
    auto img = density_image(single_atom(Vec3::Zero()), 0, 1, 3, 2, 0.0, ImageWindow{-1.0, 1.0, -0.5, 0.5});
    std::ostringstream os;
    write_image(os, img);
    std::istringstream is(os.str());
    std::string l1, l2, l3;
    std::getline(is, l1);
    std::getline(is, l2);
    std::getline(is, l3);
    EXPECT_EQ(l1, "3 2");
    EXPECT_EQ(l2, "2 1");
    EXPECT_EQ(l3, "0");
    int rows = 0;
    for (std::string line; std::getline(is, line);) ++rows;
    EXPECT_EQ(rows, 2);
}

TEST(FitBimodal, SingleGaussianIsUnimodal) {
    auto x = grid(2e-3, 128);
    auto y = mixture(x, 0.0, 0.3e-3, 0.3e-3);
    EXPECT_TRUE(fit_bimodal(x, y).unimodal);
}

TEST(FitBimodal, RecoversThirtySeventyMixture) {
    auto x = grid(2e-3, 200);
    auto y = mixture(x, 0.3, 0.1e-3, 0.5e-3);
    auto f = fit_bimodal(x, y);
    EXPECT_FALSE(f.unimodal);
    EXPECT_NEAR(f.narrow.weight, 0.3, 0.05);
    EXPECT_NEAR(f.broad.weight, 0.7, 0.05);
    EXPECT_NEAR(f.narrow.width / 0.1e-3, 1.0, 0.05);
    EXPECT_NEAR(f.broad.width / 0.5e-3, 1.0, 0.05);
    EXPECT_LE(f.narrow.width, f.broad.width);
}

TEST(FitBimodal, DeterministicGivenGuess) {
    auto x = grid(2e-3, 100);
    auto y = mixture(x, 0.4, 0.2e-3, 0.6e-3);
    BimodalGuess g{0.15e-3, 0.5e-3, 0.5, 0.0};
    auto a = fit_bimodal(x, y, g), b = fit_bimodal(x, y, g);
    EXPECT_EQ(a.narrow.width, b.narrow.width);
    EXPECT_EQ(a.broad.weight, b.broad.weight);
    EXPECT_LE(a.evaluations, 200 * 6);
}

TEST(FitBimodal, InvalidProfileThrows) {
    auto x = grid(1e-3, 8);
    EXPECT_THROW(fit_bimodal(x, std::vector<double>(8, 1.0)), std::invalid_argument);
    auto x2 = grid(1e-3, 20);
    std::vector<double> y(20, 1.0);
    y[3] = -1.0;
    EXPECT_THROW(fit_bimodal(x2, y), std::invalid_argument);
    EXPECT_THROW(fit_bimodal(x2, std::vector<double>(20, 0.0)), std::invalid_argument);
}
