#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pspace {

using cplx = std::complex<double>;

/// Dense row-major matrix. Rows are contiguous, which the hot loops
/// (kernel assembly, half-step application) rely on.
template <typename T>
class Matrix {
  public:
    Matrix() : rows_(0), cols_(0) {}

    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    T* row(std::size_t i) { return data_.data() + i * cols_; }
    const T* row(std::size_t i) const { return data_.data() + i * cols_; }

    T* data() { return data_.data(); }
    const T* data() const { return data_.data(); }

    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

  private:
    std::size_t rows_, cols_;
    std::vector<T> data_;
};

} // namespace pspace
