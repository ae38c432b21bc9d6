#include "ecgbench/layers.hpp"

#include <algorithm>
#include <stdexcept>

namespace ecgbench {

Padding padding_from_string(const std::string& name) {
    if (name == "valid") return Padding::Valid;
    if (name == "same") return Padding::Same;
    throw std::invalid_argument("unknown padding mode '" + name + "'");
}

std::size_t conv_output_size(std::size_t input, std::size_t d,
                             std::size_t stride, Padding padding) {
    if (d == 0 || stride == 0) throw std::invalid_argument("conv: zero kernel or stride");
    if (padding == Padding::Same) {
        return (input + stride - 1) / stride;  // ceil(input/stride)
    }
    if (d > input) {
        throw std::invalid_argument("conv: kernel size " + std::to_string(d) +
                                    " exceeds input extent " + std::to_string(input));
    }
    return (input - d) / stride + 1;
}

std::size_t pad_before(std::size_t input, std::size_t d, std::size_t stride,
                       Padding padding) {
    if (padding == Padding::Valid) return 0;
    const std::size_t out = conv_output_size(input, d, stride, padding);
    const std::size_t needed = (out - 1) * stride + d;
    const std::size_t total = needed > input ? needed - input : 0;
    return (total + 1) / 2;  // odd deficit pads the leading side
}

Tensor conv2d_forward(const Conv2DLayer& layer, const Tensor& input,
                      std::uint64_t* mac_counter) {
    if (input.rank() != 3) {
        throw std::invalid_argument("conv2d_forward: input must be [C,H,W], got " +
                                    input.shape_string());
    }
    const std::size_t c_in = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t f = layer.num_filters, d = layer.kernel_size;
    if (layer.weights.shape() != std::vector<std::size_t>{f, c_in, d, d}) {
        throw std::invalid_argument("conv2d_forward: weight shape " +
                                    layer.weights.shape_string() +
                                    " inconsistent with input " + input.shape_string());
    }
    const std::size_t oh = conv_output_size(h, d, layer.stride, layer.padding);
    const std::size_t ow = conv_output_size(w, d, layer.stride, layer.padding);
    const std::size_t ph = pad_before(h, d, layer.stride, layer.padding);
    const std::size_t pw = pad_before(w, d, layer.stride, layer.padding);

    Tensor out({f, oh, ow});
    for (std::size_t fi = 0; fi < f; ++fi) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                double acc = layer.bias.at(fi);
                for (std::size_t c = 0; c < c_in; ++c) {
                    for (std::size_t m = 0; m < d; ++m) {
                        const std::ptrdiff_t ii =
                            static_cast<std::ptrdiff_t>(i * layer.stride + m) -
                            static_cast<std::ptrdiff_t>(ph);
                        if (ii < 0 || ii >= static_cast<std::ptrdiff_t>(h)) continue;
                        for (std::size_t n = 0; n < d; ++n) {
                            const std::ptrdiff_t jj =
                                static_cast<std::ptrdiff_t>(j * layer.stride + n) -
                                static_cast<std::ptrdiff_t>(pw);
                            if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(w)) continue;
                            acc += input.at(c, static_cast<std::size_t>(ii),
                                            static_cast<std::size_t>(jj)) *
                                   layer.weights.at(fi, c, m, n);
                            if (mac_counter) ++*mac_counter;
                        }
                    }
                }
                out.at(fi, i, j) = acc;
            }
        }
    }
    return out;
}

Tensor conv1d_forward(const Conv1DLayer& layer, const Tensor& input,
                      std::uint64_t* mac_counter) {
    if (input.rank() != 2) {
        throw std::invalid_argument("conv1d_forward: input must be [C,L], got " +
                                    input.shape_string());
    }
    const std::size_t c_in = input.dim(0), len = input.dim(1);
    const std::size_t f = layer.num_filters, d = layer.kernel_size;
    if (layer.weights.shape() != std::vector<std::size_t>{f, c_in, d}) {
        throw std::invalid_argument("conv1d_forward: weight shape " +
                                    layer.weights.shape_string() +
                                    " inconsistent with input " + input.shape_string());
    }
    const std::size_t ol = conv_output_size(len, d, layer.stride, layer.padding);
    const std::size_t p0 = pad_before(len, d, layer.stride, layer.padding);

    Tensor out({f, ol});
    for (std::size_t fi = 0; fi < f; ++fi) {
        for (std::size_t j = 0; j < ol; ++j) {
            double acc = layer.bias.at(fi);
            for (std::size_t c = 0; c < c_in; ++c) {
                for (std::size_t m = 0; m < d; ++m) {
                    const std::ptrdiff_t jj =
                        static_cast<std::ptrdiff_t>(j * layer.stride + m) -
                        static_cast<std::ptrdiff_t>(p0);
                    if (jj < 0 || jj >= static_cast<std::ptrdiff_t>(len)) continue;
                    acc += input.at(c, static_cast<std::size_t>(jj)) *
                           layer.weights.at(fi, c, m);
                    if (mac_counter) ++*mac_counter;
                }
            }
            out.at(fi, j) = acc;
        }
    }
    return out;
}

Tensor maxpool2d_forward(const MaxPool2DLayer& layer, const Tensor& input,
                         std::uint64_t* mac_counter) {
    if (input.rank() != 3) {
        throw std::invalid_argument("maxpool2d_forward: input must be [C,H,W]");
    }
    const std::size_t c = input.dim(0), h = input.dim(1), w = input.dim(2);
    const std::size_t p = layer.window, s = layer.stride;
    if (p == 0 || s == 0) throw std::invalid_argument("maxpool: zero window or stride");
    if (p > h || p > w) throw std::invalid_argument("maxpool: window exceeds input extent");
    const std::size_t oh = (h - p) / s + 1, ow = (w - p) / s + 1;
    Tensor out({c, oh, ow});
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t i = 0; i < oh; ++i) {
            for (std::size_t j = 0; j < ow; ++j) {
                double mx = input.at(ci, i * s, j * s);
                for (std::size_t m = 0; m < p; ++m)
                    for (std::size_t n = 0; n < p; ++n)
                        mx = std::max(mx, input.at(ci, i * s + m, j * s + n));
                out.at(ci, i, j) = mx;
                if (mac_counter) ++*mac_counter;
            }
        }
    }
    return out;
}

Tensor maxpool1d_forward(const MaxPool1DLayer& layer, const Tensor& input,
                         std::uint64_t* mac_counter) {
    if (input.rank() != 2) {
        throw std::invalid_argument("maxpool1d_forward: input must be [C,L]");
    }
    const std::size_t c = input.dim(0), len = input.dim(1);
    const std::size_t p = layer.window, s = layer.stride;
    if (p == 0 || s == 0) throw std::invalid_argument("maxpool: zero window or stride");
    if (p > len) throw std::invalid_argument("maxpool: window exceeds input extent");
    const std::size_t ol = (len - p) / s + 1;
    Tensor out({c, ol});
    for (std::size_t ci = 0; ci < c; ++ci) {
        for (std::size_t j = 0; j < ol; ++j) {
            double mx = input.at(ci, j * s);
            for (std::size_t m = 0; m < p; ++m)
                mx = std::max(mx, input.at(ci, j * s + m));
            out.at(ci, j) = mx;
            if (mac_counter) ++*mac_counter;
        }
    }
    return out;
}

Tensor dense_forward(const DenseLayer& layer, const Tensor& x,
                     std::uint64_t* mac_counter) {
    if (x.rank() != 1) {
        throw std::invalid_argument("dense_forward: input must be rank-1, got " +
                                    x.shape_string());
    }
    const std::size_t out_n = layer.weights.dim(0), in_n = layer.weights.dim(1);
    if (x.dim(0) != in_n || layer.bias.dim(0) != out_n) {
        throw std::invalid_argument("dense_forward: dimension mismatch");
    }
    Tensor z = add(matvec(layer.weights, x), layer.bias);
    if (mac_counter) *mac_counter += static_cast<std::uint64_t>(out_n) * in_n;
    if (layer.activation == Activation::Softmax) return softmax(z);
    return map_elementwise(z, layer.activation);
}

Tensor dropout_forward(const DropoutLayer& layer, const Tensor& x,
                       bool training, RngStream& rng) {
    if (layer.rate < 0.0 || layer.rate >= 1.0) {
        throw std::invalid_argument("dropout: rate must lie in [0,1)");
    }
    if (!training || layer.rate == 0.0) return x;
    const double keep = 1.0 - layer.rate;
    Tensor out = x;
    for (double& v : out.data()) {
        v = (rng.uniform() < layer.rate) ? 0.0 : v / keep;
    }
    return out;
}

}  // namespace ecgbench
