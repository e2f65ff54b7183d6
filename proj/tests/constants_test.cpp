#include <gtest/gtest.h>

#include <dkick/constants.hpp>
#include <numbers>

using namespace dkick;

namespace {
const AtomSpecies rb = AtomSpecies::rubidium85();
}

TEST(PhysicalConstants, HbarIsPlanckOverTwoPi) {
    EXPECT_NEAR(constants.hbar / (constants.planck_h / (2.0 * std::numbers::pi)), 1.0, 1e-12);
}

TEST(PhysicalConstants, AllPositive) {
    EXPECT_GT(constants.planck_h, 0.0);
    EXPECT_GT(constants.hbar, 0.0);
    EXPECT_GT(constants.k_boltzmann, 0.0);
    EXPECT_GT(constants.bohr_magneton, 0.0);
    EXPECT_GT(constants.mu0, 0.0);
    EXPECT_GT(constants.gravity_g, 0.0);
}

TEST(AtomSpecies, Rubidium85Record) {
    EXPECT_EQ(rb.f_ground(), 3);
    EXPECT_GE(rb.d2_wavelength(), 779e-9);
    EXPECT_LE(rb.d2_wavelength(), 781e-9);
    EXPECT_DOUBLE_EQ(rb.g_f(), 1.0 / 3.0);
    EXPECT_GT(rb.mass(), 0.0);
}

TEST(AtomSpecies, RejectsInvalidFields) {
    EXPECT_THROW(AtomSpecies(0.0, 780e-9, 3, 0.5), std::domain_error);
    EXPECT_THROW(AtomSpecies(1e-25, -1.0, 3, 0.5), std::domain_error);
    EXPECT_THROW(AtomSpecies(1e-25, 780e-9, -1, 0.5), std::domain_error);
}

TEST(AtomSpecies, MomentRange) {
    EXPECT_DOUBLE_EQ(rb.moment(3), constants.bohr_magneton);
    EXPECT_DOUBLE_EQ(rb.moment(0), 0.0);
    EXPECT_DOUBLE_EQ(rb.moment(-3), -constants.bohr_magneton);
    EXPECT_THROW(rb.moment(4), std::domain_error);
    EXPECT_THROW(rb.moment(-4), std::domain_error);
}

TEST(RecoilVelocity, Rubidium) {
    double v = recoil_velocity(rb);
    EXPECT_NEAR(v, 6.0e-3, 0.01 * 6.0e-3);
    EXPECT_NEAR(v, 6.02293462137326e-3, 1e-12);
}

TEST(RecoilVelocity, DoubledMassHalves) {
    AtomSpecies heavy(2.0 * rb.mass(), rb.d2_wavelength(), 3, rb.g_f());
    EXPECT_NEAR(recoil_velocity(heavy) / recoil_velocity(rb), 0.5, 1e-14);
}

TEST(RecoilTemperature, Rubidium) {
    double t = recoil_temperature(rb);
    EXPECT_NEAR(t, 0.37e-6, 0.02 * 0.37e-6);
    EXPECT_NEAR(t, 3.704692173695463e-07, 1e-15);
}

TEST(RecoilTemperature, QuadrupledMassQuarters) {
    AtomSpecies heavy(4.0 * rb.mass(), rb.d2_wavelength(), 3, rb.g_f());
    EXPECT_NEAR(recoil_temperature(heavy) / recoil_temperature(rb), 0.25, 1e-14);
}

TEST(RecoilTemperature, RatioToSixMicrokelvin) {
    EXPECT_NEAR(recoil_temperature(rb) / 6e-6, 0.062, 0.001);
}

TEST(DeBroglie, SixMicrokelvin) {
    double l = de_broglie_wavelength(rb, 6e-6);
    EXPECT_GE(l, 0.19e-6);
    EXPECT_LE(l, 0.20e-6);
}

TEST(DeBroglie, FiveNanokelvin) {
    EXPECT_NEAR(de_broglie_wavelength(rb, 5e-9), 6.716141376889215e-06, 1e-12);
}

TEST(DeBroglie, QuadrupledTemperatureHalves) {
    EXPECT_NEAR(de_broglie_wavelength(rb, 4e-6) / de_broglie_wavelength(rb, 1e-6), 0.5, 1e-14);
}

TEST(DeBroglie, NonPositiveTemperatureThrows) {
    EXPECT_THROW(de_broglie_wavelength(rb, 0.0), std::domain_error);
    EXPECT_THROW(de_broglie_wavelength(rb, -1e-6), std::domain_error);
}

TEST(ConstantsProperties, RecoilMomentumIsPlanckOverWavelength) {
    EXPECT_NEAR(recoil_velocity(rb) * rb.mass() * rb.d2_wavelength() / constants.planck_h, 1.0, 1e-12);
}

TEST(ConstantsProperties, DeBroglieAtRecoilTemperatureIsWavelength) {
    EXPECT_NEAR(de_broglie_wavelength(rb, recoil_temperature(rb)) / rb.d2_wavelength(), 1.0, 1e-6);
}

TEST(Units, BoundaryFactors) {
    EXPECT_DOUBLE_EQ(units::gauss, 1e-4);
    EXPECT_DOUBLE_EQ(units::gauss_per_cm, 1e-2);
    EXPECT_DOUBLE_EQ(units::gauss_per_cm2, 1.0);
}
