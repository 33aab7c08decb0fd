#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "notfs/tfst.hpp"
#include "notfs/verify.hpp"

using namespace notfs;
using namespace notfs::tfst;

namespace {

TfstParams small_params(Rational lambda = {1, 1}, Rational mu = {1, 1}) {
    TfstParams p;
    p.lambda = lambda;
    p.mu = mu;
    p.samples_per_T = 4;
    p.periods = 6;
    return p;
}

SampledSignal random_signal(const TfstParams& p, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    SampledSignal x{std::vector<Complex>(p.frame_samples()), p.step(), 0.0};
    for (auto& s : x.samples) s = {g(rng), g(rng)};
    return x;
}

double max_abs(const std::vector<Complex>& v) {
    double m = 0.0;
    for (auto z : v) m = std::max(m, std::abs(z));
    return m;
}

// Forward transform written out directly from the defining sum.
Complex oracle_tfst(const SampledSignal& x, const TfstParams& p, std::size_t a, std::size_t b) {
    const double lt = p.lambda.value() * p.T;
    const double nu = static_cast<double>(b) * p.mu.value() * p.delta_f() / p.periods;
    Complex acc{};
    for (std::size_t n = 0; n < p.periods; ++n) {
        const std::size_t idx = (a + n * p.samples_per_period()) % x.samples.size();
        acc += x.samples[idx] * std::polar(1.0, -2.0 * kPi * n * nu * p.T / p.mu.value());
    }
    return std::sqrt(lt) * acc;
}

}  // namespace

TEST_CASE("parameter validation") {
    TfstParams p = small_params({1, 3});
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);  // lambda*T = 4/3 samples
    p.lambda = {0, 1};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    CHECK_NOTHROW(small_params({1, 2}, {3, 2}).validate());
}

TEST_CASE("forward transform of a unit impulse") {
    const auto p = small_params();
    SampledSignal x{std::vector<Complex>(p.frame_samples()), p.step(), 0.0};
    x.samples[0] = 1.0;
    const auto m = tfst_forward(x, p);
    for (std::size_t a = 0; a < m.values.rows(); ++a)
        for (std::size_t b = 0; b < m.values.cols(); ++b)
            CHECK(std::abs(m.values(a, b) - (a == 0 ? Complex{std::sqrt(p.T)} : Complex{})) < 1e-15);
    const auto back = tfst_invert_time(m, p);
    std::vector<Complex> diff(back.samples.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = back.samples[i] - x.samples[i];
    CHECK(max_abs(diff) < 1e-14);
}

TEST_CASE("forward transform matches the defining sum") {
    std::mt19937_64 rng(5);
    for (auto [l, m] : {std::pair{Rational{1, 1}, Rational{1, 1}}, {Rational{2, 1}, Rational{1, 2}},
                        {Rational{1, 2}, Rational{3, 1}}}) {
        const auto p = small_params(l, m);
        const auto x = random_signal(p, rng);
        const auto map = tfst_forward(x, p);
        double worst = 0.0;
        for (std::size_t a = 0; a < map.values.rows(); ++a)
            for (std::size_t b = 0; b < map.values.cols(); ++b)
                worst = std::max(worst, std::abs(map.values(a, b) - oracle_tfst(x, p, a, b)));
        CHECK(worst < 1e-12);
    }
}

TEST_CASE("complex exponential concentrates on its Doppler row") {
    auto p = small_params();
    p.periods = 8;
    const std::size_t b0 = 3;
    const double nu0 = b0 * p.nu_step();
    SampledSignal x{std::vector<Complex>(p.frame_samples()), p.step(), 0.0};
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        x.samples[i] = std::polar(1.0, 2.0 * kPi * nu0 * i * p.step());
    const auto m = tfst_forward(x, p);
    for (std::size_t a = 0; a < m.values.rows(); ++a) {
        for (std::size_t b = 0; b < m.values.cols(); ++b) {
            const double expected = dirichlet_sq((static_cast<double>(b) - b0) / p.periods, p.periods);
            CHECK(std::norm(m.values(a, b)) == doctest::Approx(expected).epsilon(1e-10).scale(1.0));
        }
    }
}

TEST_CASE("time inversion round trip and zero map") {
    std::mt19937_64 rng(9);
    for (auto [l, m] : {std::pair{Rational{1, 1}, Rational{1, 1}}, {Rational{1, 1}, Rational{2, 1}},
                        {Rational{2, 1}, Rational{1, 1}}}) {
        const auto p = small_params(l, m);
        const auto x = random_signal(p, rng);
        const auto back = tfst_invert_time(tfst_forward(x, p), p);
        CHECK(verify::relative_error(back.samples, x.samples) < 1e-10);

        DDMap zero = tfst_forward(x, p);
        zero.values = ComplexMatrix(zero.values.rows(), zero.values.cols());
        CHECK(max_abs(tfst_invert_time(zero, p).samples) == 0.0);
    }
}

TEST_CASE("Fourier branch") {
    const auto p = small_params();
    SampledSignal impulse{std::vector<Complex>(p.frame_samples()), p.step(), 0.0};
    impulse.samples[0] = 1.0;
    const auto mi = tfst_forward(impulse, p);
    for (int k = -3; k < 8; ++k) {
        const double f = k * p.nu_step();
        CHECK(std::abs(tfst_to_fourier(mi, p, f)) == doctest::Approx(p.step()).epsilon(1e-12));
    }

    std::mt19937_64 rng(2);
    const auto x1 = random_signal(p, rng);
    const auto x2 = random_signal(p, rng);
    SampledSignal sum = x1;
    for (std::size_t i = 0; i < sum.samples.size(); ++i) sum.samples[i] += x2.samples[i];
    const auto m1 = tfst_forward(x1, p), m2 = tfst_forward(x2, p), ms = tfst_forward(sum, p);
    for (int k = 0; k < 12; ++k) {
        const double f = k * p.nu_step();
        const Complex lhs = tfst_to_fourier(ms, p, f);
        CHECK(std::abs(lhs - tfst_to_fourier(m1, p, f) - tfst_to_fourier(m2, p, f)) <
              1e-12 * std::max(1.0, std::abs(lhs)));
        // direct DFT oracle
        CHECK(std::abs(tfst_to_fourier(m1, p, f) - fourier_direct(x1, f)) <
              1e-10 * std::max(1.0, std::abs(fourier_direct(x1, f))));
    }
    CHECK_THROWS_AS(tfst_to_fourier(m1, p, 0.37 * p.nu_step()), std::invalid_argument);
}

TEST_CASE("delay-Doppler shift") {
    const auto p = small_params();
    std::mt19937_64 rng(4);
    const auto x = random_signal(p, rng);
    const auto same = apply_dd_shift(x, 0.0, 0.0);
    CHECK(verify::relative_error(same.samples, x.samples) < 1e-15);

    const auto one = apply_dd_shift(x, p.step(), 0.0);
    for (std::size_t i = 0; i < x.samples.size(); ++i)
        CHECK(one.samples[(i + 1) % x.samples.size()] == x.samples[i]);

    CHECK_THROWS_AS(apply_dd_shift(x, 0.3 * p.step(), 0.0), std::invalid_argument);

    // shifted transform: M_x(tau - tau0, nu - nu0) exp(+j 2 pi nu0 (tau - tau0))
    const std::int64_t da = 5, db = 2;
    const double tau0 = da * p.step(), nu0 = db * p.nu_step();
    const auto r = apply_dd_shift(x, tau0, nu0);
    double worst = 0.0;
    for (std::int64_t a = 0; a < 4; ++a) {
        for (std::int64_t b = 0; b < 6; ++b) {
            const Complex lhs = tfst_at(r, p, a, b);
            const double tau = a * p.step();
            const Complex rhs =
                tfst_at(x, p, a - da, b - db) * std::polar(1.0, 2.0 * kPi * nu0 * (tau - tau0));
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("impulse basis weights") {
    const auto p = small_params();
    const auto flat = gen_basis_p(0.25, 0.0, p, 0, 4);
    REQUIRE(flat.atoms.size() == 5);
    for (const auto& atom : flat.atoms) CHECK(std::abs(atom.weight - Complex{1.0}) < 1e-15);
    CHECK(flat.atoms[2].time == doctest::Approx(2.25));

    const auto alt = gen_basis_p(0.0, p.delta_f() / 2.0, p, 0, 5);
    for (std::size_t n = 0; n < alt.atoms.size(); ++n)
        CHECK(std::abs(alt.atoms[n].weight - Complex{n % 2 == 0 ? 1.0 : -1.0}) < 1e-14);

    const auto half = small_params({1, 1}, {2, 1});
    CHECK(std::abs(gen_basis_p(0.0, 0.0, half, 0, 0).atoms[0].weight - Complex{0.5}) < 1e-15);
    CHECK_THROWS_AS(gen_basis_p(1.0, 0.0, p, 0, 1), std::invalid_argument);
}

TEST_CASE("projection coefficients equal the scaled transform") {
    std::mt19937_64 rng(8);
    for (auto [l, m] : {std::pair{Rational{1, 1}, Rational{1, 1}}, {Rational{2, 1}, Rational{1, 1}},
                        {Rational{1, 1}, Rational{2, 1}}}) {
        const auto p = small_params(l, m);
        const auto x = random_signal(p, rng);
        const double lm = l.value() * m.value();
        for (std::size_t a = 0; a < p.samples_per_period(); a += 3) {
            for (std::size_t b = 0; b < p.periods; b += 2) {
                const Complex c = project_coefficient(x, a * p.step(), b * p.nu_step(), p);
                const Complex expected = oracle_tfst(x, p, a, b) / lm;
                CHECK(std::abs(c - expected) < 1e-10 * std::max(1.0, std::abs(expected)));
            }
        }
    }
}

TEST_CASE("projection of a basis element onto the basis") {
    const auto p = small_params();
    const double tau0 = 2 * p.step(), nu0 = 3 * p.nu_step();
    const auto last = static_cast<std::int64_t>(p.periods) - 1;
    const auto basis =
        render(gen_basis_p(tau0, nu0, p, 0, last), p.step(), p.frame_samples(),
               DeltaRendering::ScaledUnitSample);
    const Complex self = inner_product(basis, basis);
    CHECK(std::abs(project_coefficient(basis, tau0, nu0, p) - self) < 1e-10 * std::abs(self));
    for (std::size_t a = 0; a < p.samples_per_period(); ++a)
        for (std::size_t b = 0; b < p.periods; ++b)
            if (a * p.step() != tau0 || b * p.nu_step() != nu0)
                CHECK(std::abs(project_coefficient(basis, a * p.step(), b * p.nu_step(), p)) <
                      1e-10 * std::abs(self));

    SampledSignal zero{std::vector<Complex>(p.frame_samples()), p.step(), 0.0};
    CHECK(project_coefficient(zero, tau0, nu0, p) == Complex{});
}

TEST_CASE("reconstruction from coefficients") {
    std::mt19937_64 rng(12);
    for (auto [l, m] : {std::pair{Rational{1, 1}, Rational{1, 1}}, {Rational{2, 1}, Rational{1, 1}},
                        {Rational{1, 1}, Rational{2, 1}}}) {
        const auto p = small_params(l, m);
        const auto x = random_signal(p, rng);
        ComplexMatrix c(p.samples_per_period(), p.periods);
        for (std::size_t a = 0; a < c.rows(); ++a)
            for (std::size_t b = 0; b < c.cols(); ++b)
                c(a, b) = project_coefficient(x, a * p.step(), b * p.nu_step(), p);
        const auto back = reconstruct_from_coefficients(c, p);
        CHECK(verify::relative_error(back.samples, x.samples) < 1e-8);
    }
}

TEST_CASE("psi basis") {
    const auto p = small_params();
    const auto single = gen_basis_psi(0.5, 0.0, p, 1);
    for (std::size_t i = 0; i < single.samples.size(); ++i)
        CHECK(single.samples[i] == (i == 2 ? Complex{1.0} : Complex{}));

    const auto flat = gen_basis_psi(0.0, 0.0, p, 4);
    for (std::size_t n = 0; n < 4; ++n) CHECK(flat.samples[n * 4] == Complex{1.0});

    CHECK_THROWS_AS(gen_basis_psi(0.0, 2.0, p, 1), std::invalid_argument);
    CHECK(retained_periods(16, small_params({2, 1})) == 8);
}

TEST_CASE("psi concentration follows the Dirichlet product on the peak row") {
    for (std::size_t n_count : {6u, 4u}) {
        auto p = small_params();
        const std::size_t a0 = 1, b0 = 2;
        const auto psi = gen_basis_psi(a0 * p.step(), b0 * p.nu_step(), p, n_count);
        const auto m = tfst_forward(psi, p);
        const double peak = psi_concentration_sq(0.0, 0.0, p, n_count, 1);
        CHECK(std::norm(m.values(a0, b0)) == doctest::Approx(peak).epsilon(1e-8));
        for (std::size_t b = 0; b < p.periods; ++b) {
            const double expected =
                psi_concentration_sq(0.0, (static_cast<double>(b) - b0) * p.nu_step(), p, n_count, 1);
            CHECK(std::abs(std::norm(m.values(a0, b)) - expected) <= 1e-8 * peak);
        }
    }
}

TEST_CASE("chi bases: orthogonal and compressed layouts") {
    TfstParams p = small_params();
    p.samples_per_T = 8;
    p.periods = 4;
    ChiLayout ortho{4, 4, 1.0, 1.0};
    const auto c00 = gen_basis_chi(0, 0, p, ortho);
    CHECK(std::abs(inner_product(c00, c00) - Complex{1.0 / 16.0 * 4.0 * 2.0 * 0.125}) < 1e-12);
    for (std::size_t k = 0; k < 4; ++k)
        for (std::size_t l = 0; l < 4; ++l)
            if (k + l > 0) CHECK(std::abs(inner_product(c00, gen_basis_chi(k, l, p, ortho))) <= 1e-10);

    ChiLayout compressed{4, 4, 1.0, 0.5};
    const Complex ip =
        inner_product(gen_basis_chi(1, 1, p, compressed), gen_basis_chi(1, 2, p, compressed));
    CHECK(std::abs(ip) > 1e-3);
    CHECK_THROWS_AS(gen_basis_chi(4, 0, p, ortho), std::invalid_argument);
}
