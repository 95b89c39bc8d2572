#ifndef HCTONE_FFT_H_
#define HCTONE_FFT_H_

#include <complex>
#include <span>
#include <vector>

namespace hctone {

// Real-to-complex transforms of a fixed size. Instances are cheap; plans are
// shared process-wide and execution is safe from concurrent threads.
class RealFft {
 public:
  explicit RealFft(std::size_t size);

  std::size_t size() const { return size_; }
  std::size_t bins() const { return size_ / 2 + 1; }

  // `input` may be shorter than size(); it is zero-padded.
  std::vector<std::complex<double>> forward(std::span<const double> input) const;
  // Unnormalized inverse: inverse(forward(x)) == size() * x.
  std::vector<double> inverse(std::span<const std::complex<double>> spectrum) const;

 private:
  std::size_t size_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace hctone

#endif  // HCTONE_FFT_H_
