#include "sscl/context.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

namespace sscl {

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) throw DataError(std::string(what) + " contains non-finite values");
}

// Indices of the k smallest squared distances, skipping `exclude`; ties by index.
std::vector<int> k_smallest(const Vector& sq_dist, int k, int exclude) {
    std::vector<int> order;
    order.reserve(sq_dist.size());
    for (int j = 0; j < sq_dist.size(); ++j)
        if (j != exclude) order.push_back(j);
    auto closer = [&](int a, int b) { return sq_dist[a] < sq_dist[b] || (sq_dist[a] == sq_dist[b] && a < b); };
    std::partial_sort(order.begin(), order.begin() + k, order.end(), closer);
    order.resize(k);
    return order;
}

}  // namespace

ContextIndex build_context_index(const Matrix& train_features, int k) {
    const int n = static_cast<int>(train_features.rows());
    if (k < 1 || k > n - 1)
        throw ConfigError("context size k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n - 1) + "]");
    require_finite(train_features, "training features");

    // Column-major copy with one point per column for contiguous distance loops.
    const Matrix points = train_features.transpose();
    ContextIndex index;
    index.k = k;
    index.neighbor_ids.resize(n, k);
    index.distances.resize(n, k);
    index.context_matrices.resize(n);

    Vector sq_dist(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) sq_dist[j] = (points.col(i) - points.col(j)).squaredNorm();
        const auto ids = k_smallest(sq_dist, k, i);
        Matrix& ctx = index.context_matrices[i];
        ctx.resize(points.rows(), k);
        for (int r = 0; r < k; ++r) {
            index.neighbor_ids(i, r) = ids[r];
            index.distances(i, r) = std::sqrt(sq_dist[ids[r]]);
            ctx.col(r) = points.col(ids[r]);
        }
    }
    return index;
}

ContextIndex build_context_index(const Dataset& train, int k) { return build_context_index(train.features, k); }

Neighborhood query_context(const Matrix& train_features, const Vector& x, int k) {
    const int n = static_cast<int>(train_features.rows());
    if (k < 1 || k > n)
        throw ConfigError("context size k=" + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]");
    if (x.size() != train_features.cols()) throw std::invalid_argument("query_context: dimension mismatch");
    if (!x.allFinite()) throw DataError("query point contains non-finite values");

    Vector sq_dist(n);
    for (int j = 0; j < n; ++j) sq_dist[j] = (train_features.row(j).transpose() - x).squaredNorm();
    Neighborhood hood;
    hood.ids = k_smallest(sq_dist, k, -1);
    hood.distances.resize(k);
    hood.context.resize(x.size(), k);
    for (int r = 0; r < k; ++r) {
        hood.distances[r] = std::sqrt(sq_dist[hood.ids[r]]);
        hood.context.col(r) = train_features.row(hood.ids[r]).transpose();
    }
    return hood;
}

Neighborhood query_context(const Dataset& train, const Vector& x, int k) {
    return query_context(train.features, x, k);
}

void write_context_csv(const ContextIndex& index, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out.precision(17);
    out << "point_index,rank,neighbor_index,distance\n";
    for (int i = 0; i < index.size(); ++i)
        for (int r = 0; r < index.k; ++r)
            out << i << ',' << r << ',' << index.neighbor_ids(i, r) << ',' << index.distances(i, r) << '\n';
}

}  // namespace sscl
