#include "iflow/process.hpp"

#include <cmath>

namespace iflow {

const char* process_name(ProcessKind k) {
    switch (k) {
        case ProcessKind::VE: return "ve";
        case ProcessKind::RF: return "rf";
        case ProcessKind::PFGMPP: return "pfgmpp";
    }
    return "?";
}

ProcessKind process_from_name(const std::string& name) {
    if (name == "ve") return ProcessKind::VE;
    if (name == "rf") return ProcessKind::RF;
    if (name == "pfgmpp") return ProcessKind::PFGMPP;
    throw ArgumentError("unknown process '" + name + "' (expected ve, rf, or pfgmpp)");
}

void ProcessSpec::validate() const {
    if (kind == ProcessKind::RF) return;
    if (T < 1) throw ArgumentError("process: T must be >= 1");
    if (!(sigma_min > 0.0)) throw ArgumentError("process: sigma_min must be positive");
    if (!(sigma_max > sigma_min)) throw ArgumentError("process: sigma_max must exceed sigma_min");
    if (kind == ProcessKind::PFGMPP) {
        if (D < 1) throw ArgumentError("process: D must be >= 1");
        if (N < 1) throw ArgumentError("process: N (data dim) must be >= 1");
    }
}

double ve_sigma(const ProcessSpec& spec, int64_t t) {
    if (spec.kind == ProcessKind::RF) throw ArgumentError("ve_sigma: RF has no noise schedule");
    if (t < 0 || t > spec.T) throw ArgumentError("ve_sigma: t outside [0, T]");
    return ve_sigma_continuous(spec, static_cast<double>(t));
}

double ve_sigma_continuous(const ProcessSpec& spec, double t) {
    double ratio = spec.sigma_max / spec.sigma_min;
    return spec.sigma_min * std::pow(ratio, t / static_cast<double>(spec.T));
}

Preconditioning precondition(const ProcessSpec& spec, double t, double radius) {
    switch (spec.kind) {
        case ProcessKind::RF:
            return {0.0, 1.0};
        case ProcessKind::VE: {
            if (t < 0.0 || t > static_cast<double>(spec.T))
                throw ArgumentError("precondition: t outside [0, T]");
            double a = spec.sigma_min / ve_sigma_continuous(spec, t);
            return {a, 1.0 - a};
        }
        case ProcessKind::PFGMPP: {
            if (!(radius > 0.0))
                throw ArgumentError("precondition: pfgmpp requires the drawn radius");
            double a = spec.sigma_min / radius;
            return {a, 1.0 - a};
        }
    }
    throw ArgumentError("precondition: bad process kind");
}

double draw_time(const ProcessSpec& spec, RngStream& rng) {
    if (spec.kind == ProcessKind::RF) return rng.uniform();
    return static_cast<double>(1 + rng.uniform_int(static_cast<uint64_t>(spec.T)));
}

double time_scale(const ProcessSpec& spec, double t) {
    if (spec.kind == ProcessKind::RF) return t;
    return t / static_cast<double>(spec.T);
}

Vec ve_perturb_with(const Vec& x0, double sigma, const Vec& eps) {
    Vec x(x0.size());
    for (size_t i = 0; i < x0.size(); ++i) x[i] = x0[i] + sigma * eps[i];
    return x;
}

Vec rf_interpolate(const Vec& x0, const Vec& z, double t) {
    Vec x(x0.size());
    for (size_t i = 0; i < x0.size(); ++i) x[i] = (1.0 - t) * x0[i] + t * z[i];
    return x;
}

double sample_pfgm_radius(double sigma, int64_t N, int64_t D, RngStream& rng) {
    if (!(sigma > 0.0)) throw ArgumentError("sample_pfgm_radius: sigma must be positive");
    if (N < 1 || D < 1) throw ArgumentError("sample_pfgm_radius: N and D must be >= 1");
    double r = sigma * std::sqrt(static_cast<double>(D));
    // beta/(1-beta) for beta ~ Beta(N/2, D/2) is the Gamma ratio; dividing the
    // raw draws avoids the 1-beta cancellation for tiny beta.
    double ga = rng.gamma(static_cast<double>(N) / 2.0);
    double gb = rng.gamma(static_cast<double>(D) / 2.0);
    return r * std::sqrt(ga / gb);
}

static void check_time(const ProcessSpec& spec, double t) {
    if (spec.kind == ProcessKind::RF) {
        if (!(t >= 0.0 && t <= 1.0)) throw ArgumentError("perturb: rf time outside [0, 1]");
        return;
    }
    if (t != std::floor(t) || t < 1.0 || t > static_cast<double>(spec.T))
        throw ArgumentError("perturb: time must be an integer in [1, T]");
}

PerturbedState perturb(const ProcessSpec& spec, const Vec& x0, double t, RngStream& rng) {
    spec.validate();
    require_finite(x0, "perturb: x0");
    check_time(spec, t);

    PerturbedState st;
    st.t = t;
    st.t_scaled = time_scale(spec, t);
    switch (spec.kind) {
        case ProcessKind::VE: {
            VeAux aux;
            aux.sigma = ve_sigma_continuous(spec, t);
            aux.epsilon = rng.normal_vec(x0.size());
            st.x_t = ve_perturb_with(x0, aux.sigma, aux.epsilon);
            st.aux = std::move(aux);
            break;
        }
        case ProcessKind::RF: {
            RfAux aux;
            aux.z = rng.normal_vec(x0.size());
            st.x_t = rf_interpolate(x0, aux.z, t);
            st.aux = std::move(aux);
            break;
        }
        case ProcessKind::PFGMPP: {
            if (static_cast<int64_t>(x0.size()) != spec.N)
                throw ArgumentError("perturb: pfgmpp N must equal the data dimension");
            PfgmAux aux;
            double sigma = ve_sigma_continuous(spec, t);
            aux.radius = sample_pfgm_radius(sigma, spec.N, spec.D, rng);
            aux.direction = rng.normal_vec(x0.size());
            double n = norm(aux.direction);
            for (double& v : aux.direction) v /= n;
            st.x_t.resize(x0.size());
            for (size_t i = 0; i < x0.size(); ++i)
                st.x_t[i] = x0[i] + aux.radius * aux.direction[i];
            st.aux = std::move(aux);
            break;
        }
    }
    return st;
}

PriorDraw draw_prior(const ProcessSpec& spec, int64_t dim, RngStream& rng) {
    spec.validate();
    if (dim < 1) throw ArgumentError("sample_prior: dim must be >= 1");
    PriorDraw out;
    switch (spec.kind) {
        case ProcessKind::VE: {
            out.x = rng.normal_vec(dim);
            for (double& v : out.x) v *= spec.sigma_max;
            break;
        }
        case ProcessKind::RF: {
            out.x = rng.normal_vec(dim);
            break;
        }
        case ProcessKind::PFGMPP: {
            if (dim != spec.N)
                throw ArgumentError("sample_prior: pfgmpp N must equal the requested dim");
            out.pfgm_radius = sample_pfgm_radius(spec.sigma_max, spec.N, spec.D, rng);
            Vec dir = rng.normal_vec(dim);
            double n = norm(dir);
            out.x.resize(dim);
            for (int64_t i = 0; i < dim; ++i) out.x[i] = out.pfgm_radius * dir[i] / n;
            break;
        }
    }
    return out;
}

Vec sample_prior(const ProcessSpec& spec, int64_t dim, RngStream& rng) {
    return draw_prior(spec, dim, rng).x;
}

}  // namespace iflow
