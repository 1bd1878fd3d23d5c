#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "conetrack/track.hpp"

namespace conetrack::cli {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kDiverged = 3,
    kIo = 4,
    kShapeMismatch = 5,
    kExpertFailure = 6,
    kMalformedTrack = 7,
};

/// Runs one command. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Generator names (oval, fsg-like, straight, left, tight-right, loose-right) or a track file.
std::shared_ptr<const Track> resolve_track(const std::string& name);

} // namespace conetrack::cli
