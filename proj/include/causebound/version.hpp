#pragma once

namespace causebound {

inline constexpr const char* kArtifactVersion = "0.1.0";

} // namespace causebound
