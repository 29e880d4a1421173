#pragma once

#include <string>
#include <vector>

#include "softmesh/vec3.hpp"

namespace softmesh {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam over Vec3 arrays with per-element step counters, so state survives
// mesh surgery: moments ride along as Vec3 attachments, counters reset on
// split and keep the max on collapse. Bias correction uses the per-element
// counter.
class AdamVec3 {
  public:
    void reset(std::size_t n);
    std::size_t size() const { return t_.size(); }
    void step(std::vector<Vec3>& params, const std::vector<Vec3>& grads, const AdamConfig& cfg,
              const std::string& name);

    std::vector<Vec3>& moment1() { return m_; }
    std::vector<Vec3>& moment2() { return v_; }
    std::vector<long>& counters() { return t_; }

  private:
    std::vector<Vec3> m_, v_;
    std::vector<long> t_;
};

// Adam over plain scalar arrays (fixed-topology parameters such as grid SDF
// values).
class AdamVector {
  public:
    void reset(std::size_t n);
    std::size_t size() const { return t_.size(); }
    void step(std::vector<double>& params, const std::vector<double>& grads,
              const AdamConfig& cfg, const std::string& name);

  private:
    std::vector<double> m_, v_;
    std::vector<long> t_;
};

class AdamScalar {
  public:
    void reset();
    void step(double& param, double grad, const AdamConfig& cfg, const std::string& name);

  private:
    double m_ = 0.0, v_ = 0.0;
    long t_ = 0;
};

}  // namespace softmesh
