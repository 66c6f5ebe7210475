#include "evtrace/simd/kernels.hpp"
#include "evtrace/simd/reference.hpp"

namespace evtrace::simd {

const Kernels& scalar_kernels() {
  static const Kernels table{
      Isa::scalar,
      &ref::conv1d<float>,
      &ref::conv1d_weight_grad<float>,
      &ref::add_relu<float>,
      &ref::relu<float>,
      &ref::luma,
  };
  return table;
}

}  // namespace evtrace::simd
