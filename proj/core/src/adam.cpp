#include "softmesh/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace softmesh {

namespace {

double update(double m, double v, long t, const AdamConfig& cfg) {
    double mhat = m / (1.0 - std::pow(cfg.beta1, static_cast<double>(t)));
    double vhat = v / (1.0 - std::pow(cfg.beta2, static_cast<double>(t)));
    return cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
}

[[noreturn]] void fail(const std::string& name, std::size_t index) {
    throw std::runtime_error("adam: non-finite gradient in " + name + " at index " +
                             std::to_string(index));
}

}  // namespace

void AdamVec3::reset(std::size_t n) {
    m_.assign(n, Vec3{0, 0, 0});
    v_.assign(n, Vec3{0, 0, 0});
    t_.assign(n, 0);
}

void AdamVec3::step(std::vector<Vec3>& params, const std::vector<Vec3>& grads,
                    const AdamConfig& cfg, const std::string& name) {
    if (params.size() != t_.size() || grads.size() != t_.size() || m_.size() != t_.size() ||
        v_.size() != t_.size())
        throw std::runtime_error("adam: size mismatch in " + name);
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Vec3& g = grads[i];
        if (!is_finite(g)) fail(name, i);
        long t = ++t_[i];
        m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * g;
        v_[i] = Vec3{cfg.beta2 * v_[i].x + (1.0 - cfg.beta2) * g.x * g.x,
                     cfg.beta2 * v_[i].y + (1.0 - cfg.beta2) * g.y * g.y,
                     cfg.beta2 * v_[i].z + (1.0 - cfg.beta2) * g.z * g.z};
        params[i].x -= update(m_[i].x, v_[i].x, t, cfg);
        params[i].y -= update(m_[i].y, v_[i].y, t, cfg);
        params[i].z -= update(m_[i].z, v_[i].z, t, cfg);
    }
}

void AdamVector::reset(std::size_t n) {
    m_.assign(n, 0.0);
    v_.assign(n, 0.0);
    t_.assign(n, 0);
}

void AdamVector::step(std::vector<double>& params, const std::vector<double>& grads,
                      const AdamConfig& cfg, const std::string& name) {
    if (params.size() != t_.size() || grads.size() != t_.size())
        throw std::runtime_error("adam: size mismatch in " + name);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double g = grads[i];
        if (!std::isfinite(g)) fail(name, i);
        long t = ++t_[i];
        m_[i] = cfg.beta1 * m_[i] + (1.0 - cfg.beta1) * g;
        v_[i] = cfg.beta2 * v_[i] + (1.0 - cfg.beta2) * g * g;
        params[i] -= update(m_[i], v_[i], t, cfg);
    }
}

void AdamScalar::reset() {
    m_ = v_ = 0.0;
    t_ = 0;
}

void AdamScalar::step(double& param, double grad, const AdamConfig& cfg,
                      const std::string& name) {
    if (!std::isfinite(grad)) fail(name, 0);
    long t = ++t_;
    m_ = cfg.beta1 * m_ + (1.0 - cfg.beta1) * grad;
    v_ = cfg.beta2 * v_ + (1.0 - cfg.beta2) * grad * grad;
    param -= update(m_, v_, t, cfg);
}

}  // namespace softmesh
