#pragma once

#include <cstddef>
#include <memory>
#include <utility>
#include <vector>

namespace atagan::detail {

// C[m,n] (+)= op(A) * op(B), all row-major and densely packed. op(A) is
// [m,k] and op(B) is [k,n].
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k,
          const double* a, const double* b, double* c, bool accumulate);

// Leaves elements uninitialized on resize; for buffers that are fully
// overwritten before being read.
template <class T>
struct UninitAllocator : std::allocator<T> {
  template <class U>
  struct rebind {
    using other = UninitAllocator<U>;
  };
  UninitAllocator() = default;
  template <class U>
  UninitAllocator(const UninitAllocator<U>&) noexcept {}

  template <class U>
  void construct(U* p) noexcept {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
};

using Scratch = std::vector<double, UninitAllocator<double>>;

}  // namespace atagan::detail
