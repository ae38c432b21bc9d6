#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ecgbench/rng.hpp"

namespace ecgbench {

/// Dense row-major N-D array of doubles. Shape is fixed at construction;
/// reshape returns a new value. Flat index of (i0,i1,...,ik) is
/// ((i0*d1 + i1)*d2 + i2)*... so the last axis is contiguous.
class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape);
    Tensor(std::vector<std::size_t> shape, std::vector<double> data);

    static Tensor zeros(const std::vector<std::size_t>& shape);
    static Tensor full(const std::vector<std::size_t>& shape, double value);
    static Tensor identity(std::size_t n);
    static Tensor from_vector(std::vector<double> values);  // rank-1

    const std::vector<std::size_t>& shape() const { return shape_; }
    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t axis) const;

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double& operator[](std::size_t flat) { return data_[flat]; }
    double operator[](std::size_t flat) const { return data_[flat]; }

    double& at(std::size_t i);
    double at(std::size_t i) const;
    double& at(std::size_t i, std::size_t j);
    double at(std::size_t i, std::size_t j) const;
    double& at(std::size_t i, std::size_t j, std::size_t k);
    double at(std::size_t i, std::size_t j, std::size_t k) const;
    double& at(std::size_t i, std::size_t j, std::size_t k, std::size_t l);
    double at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const;

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }
    bool all_finite() const;

    std::string shape_string() const;

private:
    std::vector<std::size_t> shape_;
    std::vector<double> data_;
};

enum class Activation { Sigmoid, Tanh, Relu, Softmax, None };

Activation activation_from_string(const std::string& name);
std::string to_string(Activation a);

double sigmoid(double x);

// Elementwise and linear-algebra ops. All return new tensors; inputs are
// never mutated.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matvec(const Tensor& a, const Tensor& x);  // [m,k] x [k] -> [m]
Tensor map_elementwise(const Tensor& t, Activation fn);
Tensor map_elementwise(const Tensor& t, const std::string& fn_id);
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& t, double factor);
Tensor transpose(const Tensor& t);                    // rank-2
Tensor reshape(const Tensor& t, const std::vector<std::size_t>& new_shape);
Tensor concat(const Tensor& a, const Tensor& b);      // rank-1
Tensor concat_rows(const Tensor& a, const Tensor& b); // rank-2, stack along axis 0
Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end);
Tensor row(const Tensor& t, std::size_t i);           // rank-2 -> rank-1
double sum(const Tensor& t);
std::size_t argmax(const Tensor& t);                  // rank-1
std::vector<std::size_t> argmax_rows(const Tensor& t);

/// Softmax over a rank-1 tensor; max-shifted for stability, sums to 1.
Tensor softmax(const Tensor& logits);

Tensor random_normal(const std::vector<std::size_t>& shape, double mean,
                     double stddev, RngStream& rng);
Tensor random_uniform(const std::vector<std::size_t>& shape, double lo,
                      double hi, RngStream& rng);

}  // namespace ecgbench
