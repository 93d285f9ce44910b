#pragma once
// In-memory datasets: dense row-major features with integer class labels
// (classification) or real-valued targets (regression).

#include "surgift/tensor.h"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace surgift {

struct dataset {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::size_t out_dim = 1;
    std::vector<double> x;       // n * dim, row-major
    std::vector<int> labels;     // size n when classification, else empty
    std::vector<double> y;       // n * out_dim when regression, else empty

    bool classification() const { return !labels.empty(); }

    const double* row(std::size_t i) const { return x.data() + i * dim; }

    void check() const {
        if (x.size() != n * dim) throw std::runtime_error("dataset: feature size mismatch");
        if (!labels.empty() && labels.size() != n)
            throw std::runtime_error("dataset: label count mismatch");
        if (!y.empty() && y.size() != n * out_dim)
            throw std::runtime_error("dataset: target size mismatch");
        if (labels.empty() && y.empty() && n > 0)
            throw std::runtime_error("dataset: no targets");
    }
};

// Gather a subset of rows into a [k, dim] tensor.
inline tensor_ptr gather_x(const dataset& d, const std::vector<std::size_t>& idx) {
    auto t = make_tensor({idx.size(), d.dim});
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < d.dim; ++c)
            t->data[r * d.dim + c] = d.x[idx[r] * d.dim + c];
    return t;
}

inline std::vector<int> gather_labels(const dataset& d, const std::vector<std::size_t>& idx) {
    std::vector<int> out(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) out[r] = d.labels[idx[r]];
    return out;
}

inline tensor_ptr gather_y(const dataset& d, const std::vector<std::size_t>& idx) {
    auto t = make_tensor({idx.size(), d.out_dim});
    for (std::size_t r = 0; r < idx.size(); ++r)
        for (std::size_t c = 0; c < d.out_dim; ++c)
            t->data[r * d.out_dim + c] = d.y[idx[r] * d.out_dim + c];
    return t;
}

inline std::vector<std::size_t> all_indices(const dataset& d) {
    std::vector<std::size_t> idx(d.n);
    for (std::size_t i = 0; i < d.n; ++i) idx[i] = i;
    return idx;
}

}  // namespace surgift
