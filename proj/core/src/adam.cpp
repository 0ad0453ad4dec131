#include "anomorph/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace anomorph {

void Adam::step() {
    ++t_;
    const float c1 = (float)(1.0 / (1.0 - std::pow((double)cfg_.beta1, (double)t_)));
    const float c2 = (float)(1.0 / (1.0 - std::pow((double)cfg_.beta2, (double)t_)));
    for (Parameter* p : params_) {
        if (!p->grad().all_finite())
            throw std::runtime_error("diverged: non-finite gradient in parameter '" +
                                     p->name + "'");
        const long n = p->value().size();
        const float* g = p->grad().data();
        float* m = p->adam_m.data();
        float* v = p->adam_v.data();
        float* w = p->value().data();
#pragma omp simd
        for (long i = 0; i < n; ++i) {
            m[i] = cfg_.beta1 * m[i] + (1.0f - cfg_.beta1) * g[i];
            v[i] = cfg_.beta2 * v[i] + (1.0f - cfg_.beta2) * g[i] * g[i];
            const float mhat = m[i] * c1;
            const float vhat = v[i] * c2;
            w[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        }
    }
}

void Adam::zero_grad() {
    for (Parameter* p : params_) p->zero_grad();
}

} // namespace anomorph
