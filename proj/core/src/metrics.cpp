#include "anomorph/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anomorph/errors.hpp"

namespace anomorph {

double auroc(const std::vector<float>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw validation_error("auroc: scores/labels size mismatch");
    if (scores.empty()) throw validation_error("auroc: empty input");
    long n_pos = 0, n_neg = 0;
    for (int l : labels) {
        if (l != 0 && l != 1) throw validation_error("auroc: labels must be 0 or 1");
        (l == 1 ? n_pos : n_neg)++;
    }
    if (n_pos == 0 || n_neg == 0)
        throw validation_error("auroc: both classes required");
    for (float s : scores)
        if (!std::isfinite(s)) throw validation_error("auroc: non-finite score");

    const size_t n = scores.size();
    std::vector<size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // Average rank within each tie group; sum ranks of positives.
    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
        const double avg_rank = 0.5 * ((double)(i + 1) + (double)j); // 1-based
        for (size_t k = i; k < j; ++k)
            if (labels[idx[k]] == 1) rank_sum_pos += avg_rank;
        i = j;
    }
    const double u = rank_sum_pos - 0.5 * (double)n_pos * (double)(n_pos + 1);
    return u / ((double)n_pos * (double)n_neg);
}

double mae(const Volume& a, const Volume& b) {
    if (!a.same_shape(b)) throw validation_error("mae: shape mismatch");
    double sum = 0.0;
    const float* pa = a.data.data();
    const float* pb = b.data.data();
    const long n = a.data.size();
    for (long i = 0; i < n; ++i) sum += std::fabs((double)pa[i] - (double)pb[i]);
    return sum / (double)n;
}

double ssim(const Volume& a, const Volume& b) {
    if (!a.same_shape(b)) throw validation_error("ssim: shape mismatch");
    const float* pa = a.data.data();
    const float* pb = b.data.data();
    const long n = a.data.size();
    double sa = 0.0, sb = 0.0;
    for (long i = 0; i < n; ++i) {
        sa += pa[i];
        sb += pb[i];
    }
    const double mx = sa / (double)n, my = sb / (double)n;
    double vx = 0.0, vy = 0.0, cov = 0.0;
    for (long i = 0; i < n; ++i) {
        const double dx = pa[i] - mx, dy = pb[i] - my;
        vx += dx * dx;
        vy += dy * dy;
        cov += dx * dy;
    }
    vx /= (double)n;
    vy /= (double)n;
    cov /= (double)n;
    const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
           ((mx * mx + my * my + c1) * (vx + vy + c2));
}

} // namespace anomorph
