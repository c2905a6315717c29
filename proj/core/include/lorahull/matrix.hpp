// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace lorahull {

/// Dense row-major matrix of 32-bit reals. All kernels accumulate in 64-bit.
/// Values are immutable by convention once handed to another module; the
/// mutating accessors exist for construction code only.
class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols);
    Matrix(std::size_t rows, std::size_t cols, std::vector<float> data);
    Matrix(std::initializer_list<std::initializer_list<float>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    float at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    float& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

    std::span<const float> data() const { return data_; }
    std::vector<float>& storage() { return data_; }

    std::string shape_str() const;
    bool all_finite() const;
    Matrix transposed() const;

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<float> data_;
};

/// Standard product; requires lhs.cols == rhs.rows.
Matrix matmul(const Matrix& lhs, const Matrix& rhs);

/// Sum of elementwise products over identically shaped matrices.
double frobenius_inner(const Matrix& a, const Matrix& b);
double frobenius_norm(const Matrix& m);

struct SvdResult {
    Matrix u;                           // rows x k, orthonormal columns
    std::vector<float> singular_values; // length k = min(rows, cols), nonincreasing
    Matrix v;                           // cols x k, orthonormal columns
    std::size_t sweeps = 0;
};

struct SvdOptions {
    std::size_t max_sweeps = 100;
    double convergence = 1e-10; // threshold on normalized off-diagonal mass
};

/// Thin SVD via one-sided Jacobi: m == u * diag(s) * v^T.
SvdResult svd(const Matrix& m, const SvdOptions& opts = {});

struct SymEigResult {
    std::vector<float> values; // length k, nonincreasing
    Matrix vectors;            // n x k, orthonormal columns
};

/// Top-k eigenpairs of a symmetric matrix (cyclic Jacobi).
/// The input must be symmetric within 1e-6 entrywise.
SymEigResult sym_eig_top(const Matrix& m, std::size_t k);

}  // namespace lorahull
