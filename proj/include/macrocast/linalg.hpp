#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "macrocast/errors.hpp"

namespace macrocast {

/// Dense row-major matrix, just large enough for the penalized least-squares
/// and normal-equation systems in this library (dimensions stay below ~60).
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), d_(rows * cols, 0.0) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t i, std::size_t j) { return d_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return d_[i * cols_ + j]; }

    /// A^T * A
    Matrix gram() const {
        Matrix g(cols_, cols_);
        for (std::size_t i = 0; i < cols_; ++i) {
            for (std::size_t j = i; j < cols_; ++j) {
                double s = 0.0;
                for (std::size_t r = 0; r < rows_; ++r) s += (*this)(r, i) * (*this)(r, j);
                g(i, j) = s;
                g(j, i) = s;
            }
        }
        return g;
    }

    std::vector<double> matvec(const std::vector<double>& x) const {
        std::vector<double> y(rows_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * x[j];
            y[i] = s;
        }
        return y;
    }

    /// A^T * x
    std::vector<double> tmatvec(const std::vector<double>& x) const {
        std::vector<double> y(cols_, 0.0);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) y[j] += (*this)(i, j) * x[i];
        }
        return y;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> d_;
};

/// Cholesky factorization of a symmetric positive definite matrix.
/// Throws SingularSystem when a pivot collapses (relative to the diagonal scale).
class Cholesky {
  public:
    explicit Cholesky(const Matrix& a) : n_(a.rows()), l_(a.rows(), a.cols()) {
        if (a.rows() != a.cols()) throw std::invalid_argument("Cholesky: matrix must be square");
        double scale = 1.0;
        for (std::size_t i = 0; i < n_; ++i) scale = std::max(scale, std::abs(a(i, i)));
        const double tiny = 1e-13 * scale;
        for (std::size_t j = 0; j < n_; ++j) {
            double diag = a(j, j);
            for (std::size_t k = 0; k < j; ++k) diag -= l_(j, k) * l_(j, k);
            if (!(diag > tiny)) throw SingularSystem("Cholesky pivot collapsed at column " +
                                                      std::to_string(j));
            l_(j, j) = std::sqrt(diag);
            for (std::size_t i = j + 1; i < n_; ++i) {
                double s = a(i, j);
                for (std::size_t k = 0; k < j; ++k) s -= l_(i, k) * l_(j, k);
                l_(i, j) = s / l_(j, j);
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        // forward: L z = b
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t k = 0; k < i; ++k) b[i] -= l_(i, k) * b[k];
            b[i] /= l_(i, i);
        }
        // backward: L^T x = z
        for (std::size_t ii = n_; ii > 0; --ii) {
            const std::size_t i = ii - 1;
            for (std::size_t k = i + 1; k < n_; ++k) b[i] -= l_(k, i) * b[k];
            b[i] /= l_(i, i);
        }
        return b;
    }

    /// trace(M^{-1} A) where M is the factored matrix.
    double trace_of_solve(const Matrix& a) const {
        double tr = 0.0;
        std::vector<double> col(n_);
        for (std::size_t j = 0; j < n_; ++j) {
            for (std::size_t i = 0; i < n_; ++i) col[i] = a(i, j);
            tr += solve(col)[j];
        }
        return tr;
    }

  private:
    std::size_t n_;
    Matrix l_;
};

}  // namespace macrocast
