// Copyright (c) 2026 The lorahull authors
// SPDX-License-Identifier: Apache-2.0

#include "lorahull/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "lorahull/errors.hpp"

namespace lorahull {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols, 0.0f) {
    if (rows == 0 || cols == 0) {
        throw ValidationError("matrix dimensions must be positive, got " +
                              lorahull::shape_str(rows, cols));
    }
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) {
        throw ValidationError("matrix dimensions must be positive, got " +
                              lorahull::shape_str(rows, cols));
    }
    if (data_.size() != rows * cols) {
        throw ValidationError("matrix data length " + std::to_string(data_.size()) +
                              " does not match shape " + lorahull::shape_str(rows, cols));
    }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<float>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    if (rows_ == 0 || cols_ == 0) {
        throw ValidationError("matrix initializer must be non-empty");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw ValidationError("ragged matrix initializer");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0f;
    return m;
}

std::string Matrix::shape_str() const { return lorahull::shape_str(rows_, cols_); }

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](float v) { return std::isfinite(v); });
}

Matrix Matrix::transposed() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t.at(j, i) = at(i, j);
    return t;
}

Matrix matmul(const Matrix& lhs, const Matrix& rhs) {
    if (lhs.cols() != rhs.rows()) {
        throw ValidationError("matmul shape mismatch: " + lhs.shape_str() + " x " +
                              rhs.shape_str());
    }
    Matrix out(lhs.rows(), rhs.cols());
    for (std::size_t i = 0; i < lhs.rows(); ++i) {
        for (std::size_t j = 0; j < rhs.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < lhs.cols(); ++k) {
                acc += static_cast<double>(lhs.at(i, k)) * static_cast<double>(rhs.at(k, j));
            }
            out.at(i, j) = static_cast<float>(acc);
        }
    }
    return out;
}

double frobenius_inner(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw ValidationError("frobenius_inner shape mismatch: " + a.shape_str() +
                              " vs " + b.shape_str());
    }
    double acc = 0.0;
    auto da = a.data();
    auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        acc += static_cast<double>(da[i]) * static_cast<double>(db[i]);
    }
    return acc;
}

double frobenius_norm(const Matrix& m) { return std::sqrt(frobenius_inner(m, m)); }

namespace {

// Column-major f64 workspace used by the Jacobi kernels.
struct Work {
    std::size_t rows, cols;
    std::vector<double> a; // column-major

    Work(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}
    double& at(std::size_t i, std::size_t j) { return a[j * rows + i]; }
    double at(std::size_t i, std::size_t j) const { return a[j * rows + i]; }
};

double col_dot(const Work& w, std::size_t p, std::size_t q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < w.rows; ++i) acc += w.at(i, p) * w.at(i, q);
    return acc;
}

void rotate_cols(Work& w, std::size_t p, std::size_t q, double c, double s) {
    for (std::size_t i = 0; i < w.rows; ++i) {
        const double wp = w.at(i, p);
        const double wq = w.at(i, q);
        w.at(i, p) = c * wp - s * wq;
        w.at(i, q) = s * wp + c * wq;
    }
}

// Deterministic sign convention: the entry of largest magnitude in each
// column of `u` is made positive; `v`'s matching column flips with it.
void canonicalize_signs(Work& u, Work& v) {
    for (std::size_t j = 0; j < u.cols; ++j) {
        std::size_t arg = 0;
        double best = 0.0;
        for (std::size_t i = 0; i < u.rows; ++i) {
            const double mag = std::abs(u.at(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (u.at(arg, j) < 0.0) {
            for (std::size_t i = 0; i < u.rows; ++i) u.at(i, j) = -u.at(i, j);
            for (std::size_t i = 0; i < v.rows; ++i) v.at(i, j) = -v.at(i, j);
        }
    }
}

Matrix to_matrix(const Work& w) {
    Matrix m(w.rows, w.cols);
    for (std::size_t i = 0; i < w.rows; ++i)
        for (std::size_t j = 0; j < w.cols; ++j) m.at(i, j) = static_cast<float>(w.at(i, j));
    return m;
}

// Fills column j of `u` with a unit vector orthogonal to columns [0, j) by
// Gram-Schmidt over canonical basis candidates; keeps the best candidate and
// re-orthogonalizes once for stability.
void complete_column(Work& u, std::size_t j) {
    std::vector<double> best;
    double best_norm2 = -1.0;
    for (std::size_t cand = 0; cand < u.rows; ++cand) {
        std::vector<double> x(u.rows, 0.0);
        x[cand] = 1.0;
        for (std::size_t k = 0; k < j; ++k) {
            double proj = 0.0;
            for (std::size_t i = 0; i < u.rows; ++i) proj += x[i] * u.at(i, k);
            for (std::size_t i = 0; i < u.rows; ++i) x[i] -= proj * u.at(i, k);
        }
        double norm2 = 0.0;
        for (double xi : x) norm2 += xi * xi;
        if (norm2 > best_norm2) {
            best_norm2 = norm2;
            best = std::move(x);
        }
    }
    if (best_norm2 < 1e-12) {
        throw NumericError("svd: failed to complete orthonormal basis");
    }
    for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < u.rows; ++i) proj += best[i] * u.at(i, k);
        for (std::size_t i = 0; i < u.rows; ++i) best[i] -= proj * u.at(i, k);
    }
    double norm2 = 0.0;
    for (double xi : best) norm2 += xi * xi;
    const double inv = 1.0 / std::sqrt(norm2);
    for (std::size_t i = 0; i < u.rows; ++i) u.at(i, j) = best[i] * inv;
}

}  // namespace

SvdResult svd(const Matrix& m, const SvdOptions& opts) {
    const bool transposed = m.rows() < m.cols();
    const Matrix& src = m; // row-major source, read through index mapping below
    const std::size_t rows = transposed ? m.cols() : m.rows();
    const std::size_t cols = transposed ? m.rows() : m.cols();

    Work w(rows, cols);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
            w.at(i, j) = transposed ? src.at(j, i) : src.at(i, j);

    Work v(cols, cols);
    for (std::size_t j = 0; j < cols; ++j) v.at(j, j) = 1.0;

    // Columns whose mass has collapsed to round-off dust are excluded from
    // rotations and the convergence measure; they belong to the null space.
    double total2 = 0.0;
    for (double x : w.a) total2 += x * x;
    const double negligible2 = total2 * 1e-28;

    // One-sided Jacobi: orthogonalize column pairs until the normalized
    // off-diagonal mass drops below the convergence threshold.
    double off = 0.0;
    std::size_t sweep = 0;
    bool converged = false;
    for (; sweep < opts.max_sweeps; ++sweep) {
        off = 0.0;
        for (std::size_t p = 0; p + 1 < cols; ++p) {
            for (std::size_t q = p + 1; q < cols; ++q) {
                const double app = col_dot(w, p, p);
                const double aqq = col_dot(w, q, q);
                const double apq = col_dot(w, p, q);
                if (app <= negligible2 || aqq <= negligible2) continue;
                const double scale = std::sqrt(app * aqq);
                off = std::max(off, std::abs(apq) / scale);
                if (std::abs(apq) <= opts.convergence * scale) continue;

                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate_cols(w, p, q, c, s);
                rotate_cols(v, p, q, c, s);
            }
        }
        if (off <= opts.convergence) {
            converged = true;
            break;
        }
    }
    if (!converged && off > 1e-8) {
        throw NumericError("svd did not converge after " + std::to_string(opts.max_sweeps) +
                           " sweeps; residual off-diagonal mass " + std::to_string(off));
    }

    std::vector<double> sigma(cols);
    for (std::size_t j = 0; j < cols; ++j) sigma[j] = std::sqrt(col_dot(w, j, j));

    std::vector<std::size_t> order(cols);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    Work u_sorted(rows, cols);
    Work v_sorted(cols, cols);
    std::vector<double> s_sorted(cols);
    const double s_max = sigma.empty() ? 0.0 : sigma[order[0]];
    const double zero_tol = s_max * 1e-12;
    for (std::size_t j = 0; j < cols; ++j) {
        const std::size_t src_col = order[j];
        s_sorted[j] = sigma[src_col];
        for (std::size_t i = 0; i < cols; ++i) v_sorted.at(i, j) = v.at(i, src_col);
        if (sigma[src_col] > zero_tol && sigma[src_col] > 0.0) {
            const double inv = 1.0 / sigma[src_col];
            for (std::size_t i = 0; i < rows; ++i) u_sorted.at(i, j) = w.at(i, src_col) * inv;
        } else {
            s_sorted[j] = 0.0;
            complete_column(u_sorted, j);
        }
    }
    canonicalize_signs(u_sorted, v_sorted);

    SvdResult out{to_matrix(transposed ? v_sorted : u_sorted),
                  std::vector<float>(s_sorted.begin(), s_sorted.end()),
                  to_matrix(transposed ? u_sorted : v_sorted),
                  sweep + 1};
    return out;
}

SymEigResult sym_eig_top(const Matrix& m, std::size_t k) {
    if (m.rows() != m.cols()) {
        throw ValidationError("sym_eig_top requires a square matrix, got " + m.shape_str());
    }
    const std::size_t n = m.rows();
    if (k == 0 || k > n) {
        throw ValidationError("sym_eig_top: k=" + std::to_string(k) +
                              " out of range for dimension " + std::to_string(n));
    }
    double max_asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            max_asym = std::max(max_asym, std::abs(static_cast<double>(m.at(i, j)) - m.at(j, i)));
    if (max_asym > 1e-6) {
        throw ValidationError("sym_eig_top: matrix asymmetric beyond tolerance (max |a_ij - a_ji| = " +
                              std::to_string(max_asym) + ")");
    }

    // Symmetrize, then run cyclic Jacobi in f64.
    std::vector<double> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i * n + j] = 0.5 * (static_cast<double>(m.at(i, j)) + m.at(j, i));

    Work v(n, n);
    for (std::size_t j = 0; j < n; ++j) v.at(j, j) = 1.0;

    double norm = 0.0;
    for (double x : a) norm += x * x;
    norm = std::sqrt(norm);
    const double tol = std::max(norm, 1.0) * 1e-14;

    const std::size_t max_sweeps = 100;
    bool converged = false;
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        off = std::sqrt(2.0 * off);
        if (off <= tol) {
            converged = true;
            break;
        }
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double app = a[p * n + p];
                const double aqq = a[q * n + q];
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;

                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[p * n + i] = a[i * n + p];
                    a[i * n + q] = s * aip + c * aiq;
                    a[q * n + i] = a[i * n + q];
                }
                rotate_cols(v, p, q, c, s);
            }
        }
    }
    if (!converged) {
        throw NumericError("sym_eig_top did not converge after 100 sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a[x * n + x] > a[y * n + y]; });

    Work vec(n, k);
    std::vector<float> values(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t src_col = order[j];
        values[j] = static_cast<float>(a[src_col * n + src_col]);
        for (std::size_t i = 0; i < n; ++i) vec.at(i, j) = v.at(i, src_col);
    }
    Work dummy(1, k); // sign convention driven by the eigenvectors alone
    canonicalize_signs(vec, dummy);
    return SymEigResult{std::move(values), to_matrix(vec)};
}

}  // namespace lorahull
