// Minimal dense row-major matrix plus the three GEMM variants the
// network code needs. Double precision throughout.
#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace hrtfgroup {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }
    double operator()(std::size_t r, std::size_t c) const {
        assert(r < rows_ && c < cols_);
        return data_[r * cols_ + c];
    }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::span<double> row(std::size_t r) {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }
    std::span<const double> row(std::size_t r) const {
        assert(r < rows_);
        return {data_.data() + r * cols_, cols_};
    }

    std::vector<double>& storage() { return data_; }
    const std::vector<double>& storage() const { return data_; }

    void fill(double v) { data_.assign(data_.size(), v); }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A (n x k) * B (k x m), accumulating into C when accumulate is set.
inline void gemm_nn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false) {
    assert(a.cols() == b.rows());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    if (!accumulate) {
        c = Matrix(n, m);
    }
    assert(c.rows() == n && c.cols() == m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a.data() + i * k;
        double* crow = c.data() + i * m;
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = b.data() + p * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

// C = A (n x k) * B^T (B is m x k).
inline void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false) {
    assert(a.cols() == b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.rows();
    if (!accumulate) {
        c = Matrix(n, m);
    }
    assert(c.rows() == n && c.cols() == m);
    for (std::size_t i = 0; i < n; ++i) {
        const double* arow = a.data() + i * k;
        double* crow = c.data() + i * m;
        for (std::size_t j = 0; j < m; ++j) {
            const double* brow = b.data() + j * k;
            double s = 0.0;
            for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
            crow[j] += s;
        }
    }
}

// C = A^T (A is k x n) * B (k x m).
inline void gemm_tn(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false) {
    assert(a.rows() == b.rows());
    const std::size_t k = a.rows(), n = a.cols(), m = b.cols();
    if (!accumulate) {
        c = Matrix(n, m);
    }
    assert(c.rows() == n && c.cols() == m);
    for (std::size_t p = 0; p < k; ++p) {
        const double* arow = a.data() + p * n;
        const double* brow = b.data() + p * m;
        for (std::size_t i = 0; i < n; ++i) {
            const double av = arow[i];
            double* crow = c.data() + i * m;
            for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
        }
    }
}

}  // namespace hrtfgroup
