#pragma once

#include <stdexcept>
#include <string>

#include "tsekit/attention.hpp"
#include "tsekit/tensor.hpp"

namespace tsekit {

/// Thrown for malformed tensor/weight files (bad magic, truncated payload,
/// implausible dims). Plain I/O failures raise std::ios_base::failure.
class FormatError : public std::runtime_error {
  public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Binary tensor container: magic "TSE1", uint32 LE rank (always 4), four
/// uint32 LE dims in (n, c, h, w) order, then n*c*h*w IEEE-754 32-bit LE
/// values, row-major. Round trips are bit-exact.
void write_tensor(const Tensor4D& x, const std::string& path);
Tensor4D read_tensor(const std::string& path);

/// Weight container: uint32 LE record count, then one tensor record per
/// weight in the order w1, b1, w2, b2. Conv weights map (c_out, c_in, kh,
/// kw) onto the tensor dims; biases are stored as (1, len, 1, 1).
void write_weights(const ExciteWeights& w, const std::string& path);
ExciteWeights read_weights(const std::string& path);

}  // namespace tsekit
