#pragma once

#include <vector>

#include "igt/graph.hpp"

namespace igt {

// L = I - D^-1/2 A D^-1/2. Throws DomainError on isolated nodes.
Tensor normalized_laplacian(const Graph& g);

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  Tensor vectors;              // [n x n], column i pairs with values[i]
  int sweeps = 0;
};

// Cyclic Jacobi rotations for dense symmetric matrices.
// Throws DomainError if |m_ij - m_ji| > 1e-10 anywhere.
EigenDecomposition symmetric_eig(const Tensor& m);

struct LapPE {
  Tensor vectors;                  // [n x k], zero columns pad missing eigenvectors
  std::vector<double> eigenvalues; // eigenvalue per column (0 for padding)
  std::vector<bool> flipped;       // whether the column was negated to fix its sign
};

// Eigenvectors of the k smallest nonzero eigenvalues of the normalized
// Laplacian. Each column's first entry with |v| > 1e-10 is made positive;
// columns inside a near-degenerate block (gap < 1e-8) are ordered
// lexicographically on entries rounded to 1e-8.
LapPE lappe(const Graph& g, std::size_t k);

// Fills handcrafted_pse / pse_dim on every graph.
void precompute_pse(std::vector<Graph>& graphs, std::size_t k);

}  // namespace igt
