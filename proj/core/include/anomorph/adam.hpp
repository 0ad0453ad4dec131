#pragma once

#include <vector>

#include "anomorph/graph.hpp"

namespace anomorph {

struct AdamConfig {
    float lr = 1e-4f;
    float beta1 = 0.9f;
    float beta2 = 0.999f;
    float eps = 1e-8f;
};

// Standard Adam with bias correction. First/second moments live on the
// Parameter itself (so they serialize with checkpoints); the step counter
// lives here. A non-finite gradient aborts with "diverged".
class Adam {
public:
    Adam(std::vector<Parameter*> params, AdamConfig cfg)
        : params_(std::move(params)), cfg_(cfg) {}

    void step();
    void zero_grad();
    long step_count() const { return t_; }
    void set_step_count(long t) { t_ = t; }
    const std::vector<Parameter*>& params() const { return params_; }

private:
    std::vector<Parameter*> params_;
    AdamConfig cfg_;
    long t_ = 0;
};

} // namespace anomorph
