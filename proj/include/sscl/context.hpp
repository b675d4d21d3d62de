#pragma once

#include "sscl/data.hpp"
#include "sscl/types.hpp"

#include <string>
#include <vector>

namespace sscl {

/// k nearest training neighbours of every training point (self excluded).
///
/// Row i of `neighbor_ids` is sorted by ascending Euclidean distance with ties
/// going to the lower training index. `context_matrices[i]` is d x k and its
/// column j is the feature vector of neighbour `neighbor_ids(i, j)`.
struct ContextIndex {
    int k = 0;
    IndexMatrix neighbor_ids;  // n x k
    Matrix distances;          // n x k
    std::vector<Matrix> context_matrices;

    int size() const { return static_cast<int>(neighbor_ids.rows()); }
};

struct Neighborhood {
    std::vector<int> ids;
    Vector distances;
    Matrix context;  // d x k
};

ContextIndex build_context_index(const Matrix& train_features, int k);
ContextIndex build_context_index(const Dataset& train, int k);

Neighborhood query_context(const Matrix& train_features, const Vector& x, int k);
Neighborhood query_context(const Dataset& train, const Vector& x, int k);

void write_context_csv(const ContextIndex& index, const std::string& path);

}  // namespace sscl
