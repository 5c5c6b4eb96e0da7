#ifndef UQSCALE_VERSION_HPP
#define UQSCALE_VERSION_HPP

namespace uqscale {
inline constexpr const char* kVersion = "0.1.0";
}

#endif
