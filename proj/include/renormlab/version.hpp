#ifndef RENORMLAB_VERSION_HPP
#define RENORMLAB_VERSION_HPP

namespace renormlab {
inline constexpr const char* kVersion = "0.1.0";
}

#endif  // RENORMLAB_VERSION_HPP
