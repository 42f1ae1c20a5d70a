#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace uca::detail {
namespace {

// Plans are created once per shape (FFTW planning is not thread-safe) and
// executed through the new-array interface on caller buffers.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t rows, std::size_t cols, FftSign sign) {
    const Key key{rows, cols, static_cast<int>(sign)};
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;

    std::vector<Complex> scratch(rows * cols);
    auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = rows == 1
        ? fftw_plan_dft_1d(static_cast<int>(cols), buf, buf, static_cast<int>(sign), flags)
        : fftw_plan_dft_2d(static_cast<int>(rows), static_cast<int>(cols), buf, buf,
                           static_cast<int>(sign), flags);
    if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  using Key = std::tuple<std::size_t, std::size_t, int>;
  std::mutex mutex_;
  std::map<Key, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache instance;
  return instance;
}

}  // namespace

void fft(std::span<Complex> data, FftSign sign) {
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(cache().get(1, data.size(), sign), buf, buf);
}

void fft2(std::span<Complex> data, std::size_t rows, std::size_t cols, FftSign sign) {
  if (data.size() != rows * cols) throw std::invalid_argument("fft2: buffer size mismatch");
  if (data.empty()) return;
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(cache().get(rows, cols, sign), buf, buf);
}

}  // namespace uca::detail
