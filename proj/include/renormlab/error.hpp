#ifndef RENORMLAB_ERROR_HPP
#define RENORMLAB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace renormlab {

// Base of every numerical failure the library reports. name() is the stable
// identifier that ends up in CLI reports.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* name() const noexcept { return "Error"; }
};

#define RENORMLAB_DEFINE_ERROR(Type)                                   \
  class Type : public Error {                                          \
   public:                                                             \
    explicit Type(const std::string& what) : Error(#Type ": " + what) {} \
    const char* name() const noexcept override { return #Type; }       \
  };

RENORMLAB_DEFINE_ERROR(DomainError)
RENORMLAB_DEFINE_ERROR(UnsupportedOrder)
RENORMLAB_DEFINE_ERROR(NotRenormalizable)
RENORMLAB_DEFINE_ERROR(DegenerateScaling)
RENORMLAB_DEFINE_ERROR(TruncationLoss)
RENORMLAB_DEFINE_ERROR(OverlapError)
RENORMLAB_DEFINE_ERROR(NoConvergence)
RENORMLAB_DEFINE_ERROR(CombinatoricsMismatch)
RENORMLAB_DEFINE_ERROR(EmptyLevel)
RENORMLAB_DEFINE_ERROR(NoBracket)
RENORMLAB_DEFINE_ERROR(BracketNotFound)
RENORMLAB_DEFINE_ERROR(WindowNotFound)
RENORMLAB_DEFINE_ERROR(SingleItinerary)
RENORMLAB_DEFINE_ERROR(TermBlowup)

#undef RENORMLAB_DEFINE_ERROR

}  // namespace renormlab

#endif  // RENORMLAB_ERROR_HPP
