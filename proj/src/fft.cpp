#include "dgbo/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace dgbo::detail {
namespace {

std::mutex plan_mutex;
std::map<std::pair<std::size_t, int>, fftw_plan> plan_cache;

// Plans are created once per (size, direction) on throwaway buffers and reused
// via fftw_execute_dft on caller storage. FFTW_UNALIGNED keeps the plan valid
// for arbitrary caller alignment; FFTW_ESTIMATE keeps plan creation
// deterministic. Plan creation is serialized, execution is thread safe.
fftw_plan get_plan(std::size_t n, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = plan_cache.find(key);
    if (it != plan_cache.end()) return it->second;
    fftw_complex* a = fftw_alloc_complex(n);
    fftw_complex* b = fftw_alloc_complex(n);
    fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), a, b, sign,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(a);
    fftw_free(b);
    plan_cache.emplace(key, p);
    return p;
}

void run(std::size_t n, int sign, const std::complex<double>* in, std::complex<double>* out) {
    fftw_plan p = get_plan(n, sign);
    auto* src = reinterpret_cast<fftw_complex*>(const_cast<std::complex<double>*>(in));
    auto* dst = reinterpret_cast<fftw_complex*>(out);
    fftw_execute_dft(p, src, dst);
}

} // namespace

void fft_forward(std::size_t n, const std::complex<double>* in, std::complex<double>* out) {
    run(n, FFTW_FORWARD, in, out);
}

void fft_backward(std::size_t n, const std::complex<double>* in, std::complex<double>* out) {
    run(n, FFTW_BACKWARD, in, out);
}

} // namespace dgbo::detail
