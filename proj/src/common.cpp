#include "wadv/common.hpp"

#include <atomic>
#include <cmath>
#include <thread>
#include <vector>

namespace wadv {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // two splitmix64 rounds over seed ^ golden-ratio-scrambled stream
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  for (int i = 0; i < 2; ++i) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z = z ^ (z >> 31);
  }
  return z;
}

Index Rng::uniform_index(Index n) {
  if (n <= 0) throw std::invalid_argument("uniform_index: n must be positive");
  // rejection sampling to avoid modulo bias
  const std::uint64_t un = static_cast<std::uint64_t>(n);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<Index>(x % un);
}

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 in (0,1] so log is finite
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  have_spare_ = true;
  return r * std::cos(theta);
}

Cplx Rng::cnormal(double variance) {
  const double s = std::sqrt(variance / 2.0);
  const double re = normal();
  const double im = normal();
  return {s * re, s * im};
}

bool all_finite(const CVec& x) {
  return x.real().allFinite() && x.imag().allFinite();
}

bool all_finite(const RVec& x) { return x.allFinite(); }

namespace {
std::atomic<int> g_workers{0};  // 0 = use hardware_concurrency
}

void set_worker_count(int n) { g_workers.store(n); }

int worker_count() {
  int n = g_workers.load();
  if (n > 0) return n;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(Index n, const std::function<void(Index)>& fn) {
  if (n <= 0) return;
  const int nthreads = std::min<Index>(worker_count(), n);
  if (nthreads <= 1) {
    for (Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Index> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nthreads);
  for (int t = 0; t < nthreads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const Index i = next.fetch_add(1);
        if (i >= n) return;
        fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

void parallel_chunks(Index n, int chunks,
                     const std::function<void(int, Index, Index)>& fn) {
  if (n <= 0 || chunks <= 0) return;
  chunks = static_cast<int>(std::min<Index>(chunks, n));
  const Index base = n / chunks;
  const Index rem = n % chunks;
  std::vector<std::pair<Index, Index>> ranges(chunks);
  Index begin = 0;
  for (int c = 0; c < chunks; ++c) {
    const Index len = base + (c < rem ? 1 : 0);
    ranges[c] = {begin, begin + len};
    begin += len;
  }
  parallel_for(chunks, [&](Index c) {
    fn(static_cast<int>(c), ranges[c].first, ranges[c].second);
  });
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string digest_hex(const std::string& bytes) {
  const std::uint64_t h = fnv1a64(bytes);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace wadv
