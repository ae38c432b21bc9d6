#include "ecgbench/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace ecgbench {

namespace {

std::size_t checked_volume(const std::vector<std::size_t>& shape) {
    if (shape.empty()) throw std::invalid_argument("Tensor: empty shape");
    std::size_t n = 1;
    for (std::size_t d : shape) {
        if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
        n *= d;
    }
    return n;
}

void require_rank(const Tensor& t, std::size_t r, const char* op) {
    if (t.rank() != r) {
        throw std::invalid_argument(std::string(op) + ": expected rank " +
                                    std::to_string(r) + ", got " +
                                    t.shape_string());
    }
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> shape)
    : shape_(std::move(shape)), data_(checked_volume(shape_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_volume(shape_) != data_.size()) {
        throw std::invalid_argument("Tensor: data length does not match shape");
    }
}

Tensor Tensor::zeros(const std::vector<std::size_t>& shape) { return Tensor(shape); }

Tensor Tensor::full(const std::vector<std::size_t>& shape, double value) {
    Tensor t(shape);
    std::fill(t.data_.begin(), t.data_.end(), value);
    return t;
}

Tensor Tensor::identity(std::size_t n) {
    Tensor t({n, n});
    for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

Tensor Tensor::from_vector(std::vector<double> values) {
    std::size_t n = values.size();
    return Tensor({n}, std::move(values));
}

std::size_t Tensor::dim(std::size_t axis) const {
    if (axis >= shape_.size()) throw std::out_of_range("Tensor::dim: axis out of range");
    return shape_[axis];
}

double& Tensor::at(std::size_t i) { return data_[i]; }
double Tensor::at(std::size_t i) const { return data_[i]; }
double& Tensor::at(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
double Tensor::at(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
double& Tensor::at(std::size_t i, std::size_t j, std::size_t k) {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
}
double Tensor::at(std::size_t i, std::size_t j, std::size_t k) const {
    return data_[(i * shape_[1] + j) * shape_[2] + k];
}
double& Tensor::at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
}
double Tensor::at(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
    return data_[((i * shape_[1] + j) * shape_[2] + k) * shape_[3] + l];
}

bool Tensor::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double x) { return std::isfinite(x); });
}

std::string Tensor::shape_string() const {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < shape_.size(); ++i) {
        if (i) os << ",";
        os << shape_[i];
    }
    os << "]";
    return os.str();
}

Activation activation_from_string(const std::string& name) {
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "tanh") return Activation::Tanh;
    if (name == "relu") return Activation::Relu;
    if (name == "softmax") return Activation::Softmax;
    if (name == "none") return Activation::None;
    throw std::invalid_argument("unknown activation '" + name + "'");
}

std::string to_string(Activation a) {
    switch (a) {
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
        case Activation::Softmax: return "softmax";
        case Activation::None: return "none";
    }
    return "?";
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Tensor matmul(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "matmul");
    require_rank(b, 2, "matmul");
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k) {
        throw std::invalid_argument("matmul: inner dimensions " + a.shape_string() +
                                    " x " + b.shape_string());
    }
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const double av = a.at(i, p);
            for (std::size_t j = 0; j < n; ++j) out.at(i, j) += av * b.at(p, j);
        }
    }
    return out;
}

Tensor matvec(const Tensor& a, const Tensor& x) {
    require_rank(a, 2, "matvec");
    require_rank(x, 1, "matvec");
    const std::size_t m = a.dim(0), k = a.dim(1);
    if (x.dim(0) != k) {
        throw std::invalid_argument("matvec: " + a.shape_string() + " x " +
                                    x.shape_string());
    }
    Tensor out({m});
    for (std::size_t i = 0; i < m; ++i) {
        double acc = 0.0;
        for (std::size_t p = 0; p < k; ++p) acc += a.at(i, p) * x.at(p);
        out.at(i) = acc;
    }
    return out;
}

Tensor map_elementwise(const Tensor& t, Activation fn) {
    Tensor out = t;
    switch (fn) {
        case Activation::Sigmoid:
            for (double& x : out.data()) x = sigmoid(x);
            break;
        case Activation::Tanh:
            for (double& x : out.data()) x = std::tanh(x);
            break;
        case Activation::Relu:
            for (double& x : out.data()) x = x > 0.0 ? x : 0.0;
            break;
        case Activation::None:
            break;
        case Activation::Softmax:
            throw std::invalid_argument("map_elementwise: softmax is not elementwise");
    }
    return out;
}

Tensor map_elementwise(const Tensor& t, const std::string& fn_id) {
    return map_elementwise(t, activation_from_string(fn_id));
}

namespace {
template <typename F>
Tensor zip(const Tensor& a, const Tensor& b, F f, const char* op) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    a.shape_string() + " vs " + b.shape_string());
    }
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i], b[i]);
    return out;
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return zip(a, b, [](double x, double y) { return x + y; }, "add");
}
Tensor subtract(const Tensor& a, const Tensor& b) {
    return zip(a, b, [](double x, double y) { return x - y; }, "subtract");
}
Tensor hadamard(const Tensor& a, const Tensor& b) {
    return zip(a, b, [](double x, double y) { return x * y; }, "hadamard");
}

Tensor scale(const Tensor& t, double factor) {
    Tensor out = t;
    for (double& x : out.data()) x *= factor;
    return out;
}

Tensor transpose(const Tensor& t) {
    require_rank(t, 2, "transpose");
    Tensor out({t.dim(1), t.dim(0)});
    for (std::size_t i = 0; i < t.dim(0); ++i)
        for (std::size_t j = 0; j < t.dim(1); ++j) out.at(j, i) = t.at(i, j);
    return out;
}

Tensor reshape(const Tensor& t, const std::vector<std::size_t>& new_shape) {
    if (checked_volume(new_shape) != t.size()) {
        throw std::invalid_argument("reshape: volume mismatch");
    }
    return Tensor(new_shape, t.data());
}

Tensor concat(const Tensor& a, const Tensor& b) {
    require_rank(a, 1, "concat");
    require_rank(b, 1, "concat");
    std::vector<double> d = a.data();
    d.insert(d.end(), b.data().begin(), b.data().end());
    return Tensor::from_vector(std::move(d));
}

Tensor concat_rows(const Tensor& a, const Tensor& b) {
    require_rank(a, 2, "concat_rows");
    require_rank(b, 2, "concat_rows");
    if (a.dim(1) != b.dim(1)) {
        throw std::invalid_argument("concat_rows: column count mismatch");
    }
    std::vector<double> d = a.data();
    d.insert(d.end(), b.data().begin(), b.data().end());
    return Tensor({a.dim(0) + b.dim(0), a.dim(1)}, std::move(d));
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
    require_rank(t, 2, "slice_rows");
    if (begin >= end || end > t.dim(0)) {
        throw std::invalid_argument("slice_rows: bad range");
    }
    const std::size_t cols = t.dim(1);
    std::vector<double> d(t.data().begin() + begin * cols,
                          t.data().begin() + end * cols);
    return Tensor({end - begin, cols}, std::move(d));
}

Tensor row(const Tensor& t, std::size_t i) {
    require_rank(t, 2, "row");
    if (i >= t.dim(0)) throw std::out_of_range("row: index out of range");
    const std::size_t cols = t.dim(1);
    std::vector<double> d(t.data().begin() + i * cols,
                          t.data().begin() + (i + 1) * cols);
    return Tensor::from_vector(std::move(d));
}

double sum(const Tensor& t) {
    return std::accumulate(t.data().begin(), t.data().end(), 0.0);
}

std::size_t argmax(const Tensor& t) {
    require_rank(t, 1, "argmax");
    return static_cast<std::size_t>(
        std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

std::vector<std::size_t> argmax_rows(const Tensor& t) {
    require_rank(t, 2, "argmax_rows");
    std::vector<std::size_t> out(t.dim(0));
    for (std::size_t i = 0; i < t.dim(0); ++i) out[i] = argmax(row(t, i));
    return out;
}

Tensor softmax(const Tensor& logits) {
    require_rank(logits, 1, "softmax");
    const double mx = *std::max_element(logits.data().begin(), logits.data().end());
    Tensor out = logits;
    double z = 0.0;
    for (double& x : out.data()) {
        x = std::exp(x - mx);
        z += x;
    }
    for (double& x : out.data()) x /= z;
    return out;
}

Tensor random_normal(const std::vector<std::size_t>& shape, double mean,
                     double stddev, RngStream& rng) {
    if (stddev < 0.0) throw std::invalid_argument("random_normal: negative stddev");
    Tensor out(shape);
    for (double& x : out.data()) x = rng.normal(mean, stddev);
    return out;
}

Tensor random_uniform(const std::vector<std::size_t>& shape, double lo,
                      double hi, RngStream& rng) {
    Tensor out(shape);
    for (double& x : out.data()) x = rng.uniform(lo, hi);
    return out;
}

}  // namespace ecgbench
