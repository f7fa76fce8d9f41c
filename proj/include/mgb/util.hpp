#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace mgb {

// Portable across standard libraries: no std::uniform_*_distribution.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  // Uniform in [0, n), n > 0.
  std::uint64_t below(std::uint64_t n);
  // Uniform in [0, 1).
  double unit() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  // k distinct indices from [0, n), sorted.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 eng_;
};

void set_thread_count(int n);
int thread_count();

// Runs body(i) for i in [0, n). Body must be safe to call concurrently.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mgb
