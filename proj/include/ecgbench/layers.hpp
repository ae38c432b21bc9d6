#pragma once

#include <cstdint>
#include <string>

#include "ecgbench/rng.hpp"
#include "ecgbench/tensor.hpp"

namespace ecgbench {

enum class Padding { Valid, Same };

Padding padding_from_string(const std::string& name);

/// Square-kernel 2-D convolution parameters. weights is [F, C_in, D, D].
struct Conv2DLayer {
    std::size_t num_filters = 1;
    std::size_t kernel_size = 1;
    Tensor weights;  // [F, C_in, D, D]
    Tensor bias;     // [F]
    std::size_t stride = 1;
    Padding padding = Padding::Valid;
};

/// 1-D convolution parameters. weights is [F, C_in, D].
struct Conv1DLayer {
    std::size_t num_filters = 1;
    std::size_t kernel_size = 1;
    Tensor weights;  // [F, C_in, D]
    Tensor bias;     // [F]
    std::size_t stride = 1;
    Padding padding = Padding::Valid;
};

struct MaxPool2DLayer {
    std::size_t window = 2;
    std::size_t stride = 2;
};

struct MaxPool1DLayer {
    std::size_t window = 2;
    std::size_t stride = 2;
};

struct DenseLayer {
    Tensor weights;  // [out, in]
    Tensor bias;     // [out]
    Activation activation = Activation::None;
};

struct DropoutLayer {
    double rate = 0.0;  // in [0,1)
};

/// Output length of one spatial axis for kernel size d, given padding and
/// stride. Throws if the (padded) extent cannot fit the kernel.
std::size_t conv_output_size(std::size_t input, std::size_t d,
                             std::size_t stride, Padding padding);

/// Zero padding added before the axis start for `same` mode (the larger
/// half on odd deficits goes to the leading side).
std::size_t pad_before(std::size_t input, std::size_t d, std::size_t stride,
                       Padding padding);

// Forward ops. All are pure; `mac_counter`, when non-null, accumulates one
// count per multiply-accumulate (per output element for pooling).
Tensor conv2d_forward(const Conv2DLayer& layer, const Tensor& input,
                      std::uint64_t* mac_counter = nullptr);
Tensor conv1d_forward(const Conv1DLayer& layer, const Tensor& input,
                      std::uint64_t* mac_counter = nullptr);
Tensor maxpool2d_forward(const MaxPool2DLayer& layer, const Tensor& input,
                         std::uint64_t* mac_counter = nullptr);
Tensor maxpool1d_forward(const MaxPool1DLayer& layer, const Tensor& input,
                         std::uint64_t* mac_counter = nullptr);
Tensor dense_forward(const DenseLayer& layer, const Tensor& x,
                     std::uint64_t* mac_counter = nullptr);
Tensor dropout_forward(const DropoutLayer& layer, const Tensor& x,
                       bool training, RngStream& rng);

}  // namespace ecgbench
