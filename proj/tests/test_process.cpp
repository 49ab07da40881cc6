#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest/doctest.h>

#include <algorithm>
#include <cmath>

#include "iflow/process.hpp"
#include "support/radius_oracle.hpp"

using namespace iflow;

namespace {
ProcessSpec ve_spec() {
    ProcessSpec s;
    s.kind = ProcessKind::VE;
    return s;
}
ProcessSpec rf_spec() {
    ProcessSpec s;
    s.kind = ProcessKind::RF;
    return s;
}
ProcessSpec pfgm_spec(int64_t N = 2, int64_t D = 2048) {
    ProcessSpec s;
    s.kind = ProcessKind::PFGMPP;
    s.N = N;
    s.D = D;
    return s;
}
}  // namespace

TEST_CASE("geometric schedule hits both endpoints exactly") {
    ProcessSpec s = ve_spec();
    CHECK(ve_sigma(s, 0) == doctest::Approx(s.sigma_min).epsilon(1e-12));
    CHECK(ve_sigma(s, s.T) == doctest::Approx(s.sigma_max).epsilon(1e-12));
    for (int64_t t = 1; t <= s.T; ++t) CHECK(ve_sigma(s, t) > ve_sigma(s, t - 1));
    CHECK(ve_sigma_continuous(s, 500.0) == doctest::Approx(ve_sigma(s, 500)).epsilon(1e-15));
}

TEST_CASE("preconditioning matches the tabulated coefficients") {
    ProcessSpec s = ve_spec();
    for (int64_t t : {int64_t(1), int64_t(250), int64_t(999), s.T}) {
        Preconditioning p = precondition(s, double(t));
        double a = s.sigma_min / ve_sigma(s, t);
        CHECK(p.a == doctest::Approx(a).epsilon(1e-12));
        CHECK(p.b == doctest::Approx(1.0 - a).epsilon(1e-12));
    }

    ProcessSpec r = rf_spec();
    for (double t : {0.0, 0.25, 1.0}) {
        Preconditioning p = precondition(r, t);
        CHECK(p.a == 0.0);
        CHECK(p.b == 1.0);
    }

    ProcessSpec q = pfgm_spec();
    double radius = 3.7;
    Preconditioning p = precondition(q, 700.0, radius);
    CHECK(p.a == doctest::Approx(q.sigma_min / radius).epsilon(1e-12));
    CHECK(p.b == doctest::Approx(1.0 - q.sigma_min / radius).epsilon(1e-12));
    CHECK_THROWS_AS(precondition(q, 700.0, 0.0), ArgumentError);
}

TEST_CASE("rf interpolation is exact at the endpoints") {
    Vec x0 = {1.5, -2.0, 0.25};
    Vec z = {-0.5, 3.0, 10.0};
    Vec at0 = rf_interpolate(x0, z, 0.0);
    Vec at1 = rf_interpolate(x0, z, 1.0);
    for (size_t i = 0; i < x0.size(); ++i) {
        CHECK(at0[i] == x0[i]);
        CHECK(at1[i] == z[i]);
    }
    Vec mid = rf_interpolate(x0, z, 0.25);
    for (size_t i = 0; i < x0.size(); ++i)
        CHECK(mid[i] == doctest::Approx(0.75 * x0[i] + 0.25 * z[i]).epsilon(1e-15));
}

TEST_CASE("ve perturbation kernel is recoverable from its aux record") {
    ProcessSpec s = ve_spec();
    RngStream rng(1, StreamPurpose::TrainNoise, 0);
    Vec x0 = {0.5, -1.0};
    PerturbedState st = perturb(s, x0, 400.0, rng);
    const auto& aux = std::get<VeAux>(st.aux);
    CHECK(aux.sigma == doctest::Approx(ve_sigma(s, 400)).epsilon(1e-15));
    for (size_t i = 0; i < x0.size(); ++i)
        CHECK(st.x_t[i] == doctest::Approx(x0[i] + aux.sigma * aux.epsilon[i]).epsilon(1e-12));
    CHECK(st.t_scaled == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("rf perturbation stores its noise endpoint") {
    ProcessSpec s = rf_spec();
    RngStream rng(1, StreamPurpose::TrainNoise, 1);
    Vec x0 = {2.0, 0.0};
    PerturbedState st = perturb(s, x0, 0.3, rng);
    const auto& aux = std::get<RfAux>(st.aux);
    for (size_t i = 0; i < x0.size(); ++i)
        CHECK(st.x_t[i] == doctest::Approx(0.7 * x0[i] + 0.3 * aux.z[i]).epsilon(1e-12));
    CHECK(st.t_scaled == 0.3);
}

TEST_CASE("draw_time respects each process's support") {
    RngStream rng(2, StreamPurpose::TrainNoise, 0);
    ProcessSpec v = ve_spec();
    for (int i = 0; i < 2000; ++i) {
        double t = draw_time(v, rng);
        CHECK(t == std::floor(t));
        CHECK(t >= 1.0);
        CHECK(t <= double(v.T));
    }
    ProcessSpec r = rf_spec();
    for (int i = 0; i < 2000; ++i) {
        double t = draw_time(r, rng);
        CHECK(t >= 0.0);
        CHECK(t < 1.0);
    }
}

TEST_CASE("perturb replays exactly from an equal stream state") {
    for (ProcessSpec s : {ve_spec(), rf_spec(), pfgm_spec()}) {
        RngStream a(9, StreamPurpose::TrainNoise, 4);
        RngStream b(9, StreamPurpose::TrainNoise, 4);
        Vec x0 = {0.1, -0.7};
        double t = s.kind == ProcessKind::RF ? 0.6 : 321.0;
        PerturbedState pa = perturb(s, x0, t, a);
        PerturbedState pb = perturb(s, x0, t, b);
        CHECK(pa.x_t == pb.x_t);
        CHECK(a.counter() == b.counter());
    }
}

TEST_CASE("pfgm radius sampler matches the quadrature reference") {
    const int64_t N = 2, D = 2048;
    const double sigma = 1.0;
    const double r = sigma * std::sqrt(double(D));
    RngStream rng(7, StreamPurpose::TrainNoise, 0);
    const size_t n = 30000;
    std::vector<double> radii(n);
    for (auto& x : radii) x = sample_pfgm_radius(sigma, N, D, rng);

    auto table = radius_oracle::tabulate_theta_cdf(N, D);
    double ks = radius_oracle::ks_radius(radii, r, table);
    CHECK(ks < 0.015);  // 1% KS critical value at n=30000 is ~0.0094
}

TEST_CASE("pfgm augmented radius concentrates at sigma*sqrt(D)") {
    const int64_t N = 2, D = 2048;
    const double sigma = 1.0;
    const double r = sigma * std::sqrt(double(D));
    RngStream rng(8, StreamPurpose::TrainNoise, 0);
    const size_t n = 20000;
    std::vector<double> aug(n);
    for (auto& x : aug) {
        double R = sample_pfgm_radius(sigma, N, D, rng);
        x = std::sqrt(R * R + r * r) / std::sqrt(double(D));
    }
    std::nth_element(aug.begin(), aug.begin() + n / 2, aug.end());
    double median = aug[n / 2];
    CHECK(median > 0.95);
    CHECK(median < 1.05);
}

TEST_CASE("pfgm perturbation decomposes into radius times unit direction") {
    ProcessSpec s = pfgm_spec();
    RngStream rng(3, StreamPurpose::TrainNoise, 0);
    Vec x0 = {1.0, 2.0};
    PerturbedState st = perturb(s, x0, 800.0, rng);
    const auto& aux = std::get<PfgmAux>(st.aux);
    CHECK(aux.radius > 0.0);
    CHECK(norm(aux.direction) == doctest::Approx(1.0).epsilon(1e-12));
    for (size_t i = 0; i < x0.size(); ++i)
        CHECK(st.x_t[i] ==
              doctest::Approx(x0[i] + aux.radius * aux.direction[i]).epsilon(1e-12));
}

TEST_CASE("priors have the right scale per process") {
    RngStream rng(5, StreamPurpose::Sample, 0);
    ProcessSpec v = ve_spec();
    double acc = 0.0;
    const int n = 4000, dim = 2;
    for (int i = 0; i < n; ++i) acc += squared_norm(draw_prior(v, dim, rng).x);
    double per_dim = acc / double(n * dim);
    CHECK(per_dim == doctest::Approx(v.sigma_max * v.sigma_max).epsilon(0.1));

    ProcessSpec r = rf_spec();
    acc = 0.0;
    for (int i = 0; i < n; ++i) acc += squared_norm(draw_prior(r, dim, rng).x);
    CHECK(acc / double(n * dim) == doctest::Approx(1.0).epsilon(0.1));

    ProcessSpec q = pfgm_spec();
    for (int i = 0; i < 200; ++i) {
        PriorDraw d = draw_prior(q, dim, rng);
        CHECK(d.pfgm_radius > 0.0);
        CHECK(norm(d.x) == doctest::Approx(d.pfgm_radius).epsilon(1e-9));
    }
}

TEST_CASE("perturb validates its inputs") {
    ProcessSpec v = ve_spec();
    RngStream rng(0, StreamPurpose::TrainNoise, 0);
    CHECK_THROWS_AS(perturb(v, {1.0, std::nan("")}, 10.0, rng), ArgumentError);
    CHECK_THROWS_AS(perturb(v, {1.0, 2.0}, 10.5, rng), ArgumentError);  // non-integer t
    ProcessSpec q = pfgm_spec(/*N=*/3);
    CHECK_THROWS_AS(perturb(q, {1.0, 2.0}, 10.0, rng), ArgumentError);  // N != dim
}

TEST_CASE("spec validation rejects silly schedules") {
    ProcessSpec s = ve_spec();
    s.sigma_min = 0.0;
    CHECK_THROWS_AS(s.validate(), ArgumentError);
    s = ve_spec();
    s.sigma_max = s.sigma_min;
    CHECK_THROWS_AS(s.validate(), ArgumentError);
    s = ve_spec();
    s.T = 0;
    CHECK_THROWS_AS(s.validate(), ArgumentError);
}
