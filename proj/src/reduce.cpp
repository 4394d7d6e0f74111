#include "fplab/reduce.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace fplab {

namespace {
constexpr std::size_t kLeaf = 8;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= kLeaf) {
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t, std::size_t)>& body) {
  if (count == 0) return;
  const std::size_t w = std::clamp<std::size_t>(workers < 1 ? 1 : static_cast<std::size_t>(workers), 1, count);
  if (w == 1) {
    body(0, count);
    return;
  }
  const std::size_t chunk = (count + w - 1) / w;
  std::vector<std::jthread> threads;
  threads.reserve(w - 1);
  for (std::size_t t = 1; t < w; ++t) {
    const std::size_t b = t * chunk;
    const std::size_t e = std::min(count, b + chunk);
    if (b >= e) break;
    threads.emplace_back([&body, b, e] { body(b, e); });
  }
  body(0, std::min(count, chunk));
}

int hardware_workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace fplab
