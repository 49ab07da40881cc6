#pragma once

#include <cstdint>
#include <variant>

#include "iflow/common.hpp"
#include "iflow/rng.hpp"

namespace iflow {

enum class ProcessKind { VE, RF, PFGMPP };

const char* process_name(ProcessKind k);
ProcessKind process_from_name(const std::string& name);  // ve | rf | pfgmpp

// Forward-process description. T/sigma_* apply to VE and PFGM++; D and N apply
// to PFGM++ only (N is the data dimension, D the augmentation dimension).
struct ProcessSpec {
    ProcessKind kind = ProcessKind::RF;
    int64_t T = 1000;
    double sigma_min = 0.01;
    double sigma_max = 50.0;
    int64_t D = 2048;
    int64_t N = 0;

    void validate() const;
};

// Coefficients of the estimator g(anchor, x_t, t) = a*x_t + b*G(anchor, x_t, t).
struct Preconditioning {
    double a = 0.0;
    double b = 1.0;
};

struct VeAux {
    double sigma = 0.0;
    Vec epsilon;
};
struct RfAux {
    Vec z;
};
struct PfgmAux {
    double radius = 0.0;
    Vec direction;  // unit vector
};

// One perturbed training state. t is the raw process time (integer-valued for
// VE/PFGM++, in [0,1] for RF); t_scaled is what the net consumes (t/T or t).
struct PerturbedState {
    Vec x_t;
    double t = 0.0;
    double t_scaled = 0.0;
    std::variant<VeAux, RfAux, PfgmAux> aux;
};

// Geometric noise schedule sigma_t = sigma_min * (sigma_max/sigma_min)^(t/T),
// defined on the integer grid t in [0, T].
double ve_sigma(const ProcessSpec& spec, int64_t t);

// Same schedule off the integer grid; used by the ODE oracle.
double ve_sigma_continuous(const ProcessSpec& spec, double t);

// a_t/b_t per process. PFGM++ preconditioning depends on the drawn radius, so
// radius must be supplied there (and is ignored elsewhere).
Preconditioning precondition(const ProcessSpec& spec, double t, double radius = 0.0);

// Draws a training time: uniform integer {1..T} for VE/PFGM++, U[0,1] for RF.
double draw_time(const ProcessSpec& spec, RngStream& rng);

double time_scale(const ProcessSpec& spec, double t);

// Deterministic perturbation kernels, split out so tests can pin the noise.
Vec ve_perturb_with(const Vec& x0, double sigma, const Vec& eps);
Vec rf_interpolate(const Vec& x0, const Vec& z, double t);

// Draws the PFGM++ perturbation radius from
//   p_r(R) ∝ R^(N-1) / (R^2 + r^2)^((N+D)/2),   r = sigma * sqrt(D),
// via R = r * sqrt(beta/(1-beta)), beta ~ Beta(N/2, D/2) (computed as the exact
// ratio of the two underlying Gamma draws).
double sample_pfgm_radius(double sigma, int64_t N, int64_t D, RngStream& rng);

// Forward perturbation at time t. Draws all randomness from rng; the aux
// record carries everything needed to replay or recompute the state.
PerturbedState perturb(const ProcessSpec& spec, const Vec& x0, double t, RngStream& rng);

// Prior draw at t = T (VE: sigma_max * N(0,I); RF: N(0,I); PFGM++: R_T * v with
// R_T drawn at sigma_max). pfgm_radius is 0 for the other processes.
struct PriorDraw {
    Vec x;
    double pfgm_radius = 0.0;
};
PriorDraw draw_prior(const ProcessSpec& spec, int64_t dim, RngStream& rng);
Vec sample_prior(const ProcessSpec& spec, int64_t dim, RngStream& rng);

}  // namespace iflow
