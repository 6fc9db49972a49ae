#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "okbc/common.hpp"
#include "okbc/rng.hpp"

namespace okbc {

// Dense row-major tensor of 64-bit floats. Rank is dynamic but nearly all of
// the code works with scalars, vectors and matrices.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(count(shape_), 0.0) {}

    Tensor(std::vector<std::size_t> shape, std::vector<double> values)
        : shape_(std::move(shape)), data_(std::move(values)) {
        if (data_.size() != count(shape_))
            throw ComputeError("tensor value count does not match shape");
    }

    static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor full(std::vector<std::size_t> shape, double v) {
        Tensor t(std::move(shape));
        for (double& x : t.data_) x = v;
        return t;
    }

    // Row-major 2-D literal, e.g. Tensor::matrix({{1,2},{3,4}}).
    static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows) {
        std::size_t r = rows.size();
        std::size_t c = r == 0 ? 0 : rows.begin()->size();
        Tensor t({r, c});
        std::size_t i = 0;
        for (const auto& row : rows) {
            if (row.size() != c) throw ComputeError("ragged matrix literal");
            for (double v : row) t.data_[i++] = v;
        }
        return t;
    }

    // Glorot-style uniform init in +/- sqrt(6 / (fan_in + fan_out)).
    static Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        Tensor t({fan_in, fan_out});
        for (double& x : t.data_) x = rng.uniform_real(-bound, bound);
        return t;
    }

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t ndim() const { return shape_.size(); }
    std::size_t dim(std::size_t i) const { return shape_.at(i); }
    std::size_t numel() const { return data_.size(); }
    bool is_scalar() const { return data_.size() == 1; }

    std::size_t rows() const { return ndim() == 2 ? shape_[0] : (ndim() == 1 ? 1 : dim(0)); }
    std::size_t cols() const { return ndim() == 2 ? shape_[1] : (ndim() == 1 ? shape_[0] : dim(1)); }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    double item() const {
        if (!is_scalar()) throw ComputeError("item() on non-scalar tensor");
        return data_[0];
    }

    void fill(double v) {
        for (double& x : data_) x = v;
    }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

    static std::size_t count(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return n;
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

inline std::string shape_str(const Tensor& t) {
    std::string s = "[";
    for (std::size_t i = 0; i < t.ndim(); ++i) {
        if (i) s += "x";
        s += std::to_string(t.dim(i));
    }
    return s + "]";
}

// Boolean matrix used for attention masks; keep[r*cols + c] != 0 means the
// entry participates.
struct Mask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> keep;

    Mask() = default;
    Mask(std::size_t r, std::size_t c, std::uint8_t fill_value = 1)
        : rows(r), cols(c), keep(r * c, fill_value) {}

    std::uint8_t& at(std::size_t r, std::size_t c) { return keep[r * cols + c]; }
    std::uint8_t at(std::size_t r, std::size_t c) const { return keep[r * cols + c]; }
};

}  // namespace okbc
