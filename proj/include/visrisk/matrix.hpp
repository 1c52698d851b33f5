#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace visrisk {

/// Dense row-major real matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double>& data() noexcept { return data_; }
    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Row-major matrix of vectors with a per-cell observation mask. Unobserved
/// cells hold 0.0 so kernels can read them without branching on NaN.
class MaskedRows {
public:
    MaskedRows() = default;
    explicit MaskedRows(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return dim_ == 0 ? 0 : values_.size() / dim_; }
    bool empty() const noexcept { return values_.empty(); }

    void push_back(std::span<const double> values, std::span<const unsigned char> mask);
    /// Appends a fully observed row.
    void push_back(std::span<const double> values);

    std::span<const double> values(std::size_t r) const { return {values_.data() + r * dim_, dim_}; }
    std::span<const unsigned char> mask(std::size_t r) const { return {mask_.data() + r * dim_, dim_}; }
    std::size_t observed_count(std::size_t r) const;
    bool complete(std::size_t r) const { return observed_count(r) == dim_; }

private:
    std::size_t dim_ = 0;
    std::vector<double> values_;
    std::vector<unsigned char> mask_;
};

}  // namespace visrisk
