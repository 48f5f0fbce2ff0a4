#ifndef WADV_COMMON_HPP
#define WADV_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>

namespace wadv {

using Cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

// Error taxonomy; the CLI maps these to distinct exit codes.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// splitmix64-based mixing, used to derive independent per-item streams
/// from (seed, stream) pairs.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Deterministic RNG wrapper. mt19937_64 is bit-exact per the standard and
/// the uniform/normal transforms below are our own, so identical seeds give
/// identical streams on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// uniform in [0, 1)
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// uniform integer in [0, n)
  Index uniform_index(Index n);

  /// standard normal via Box-Muller
  double normal();

  /// circularly-symmetric complex Gaussian with E|w|^2 = variance
  Cplx cnormal(double variance);

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

bool all_finite(const CVec& x);
bool all_finite(const RVec& x);

/// Rounds every component to its nearest float32 value. Values produced this
/// way survive float32 file formats bit-exactly.
inline CVec snap_f32(const CVec& x) {
  CVec y(x.size());
  for (Index i = 0; i < x.size(); ++i)
    y[i] = Cplx{static_cast<float>(x[i].real()),
                static_cast<float>(x[i].imag())};
  return y;
}

void set_worker_count(int n);
int worker_count();

/// Runs fn(i) for i in [0, n) across worker threads. Callers must write to
/// disjoint output slots; any reduction is done afterwards in index order so
/// results do not depend on the thread count.
void parallel_for(Index n, const std::function<void(Index)>& fn);

/// Splits [0, n) into exactly `chunks` contiguous ranges (independent of the
/// worker count) and runs fn(chunk, begin, end) for each. Per-chunk partial
/// results combined in chunk order give thread-count-independent reductions.
void parallel_chunks(Index n, int chunks,
                     const std::function<void(int, Index, Index)>& fn);

/// FNV-1a 64-bit over a string; stable content digest for configs/artifacts.
std::uint64_t fnv1a64(const std::string& bytes);
std::string digest_hex(const std::string& bytes);

}  // namespace wadv

#endif  // WADV_COMMON_HPP
