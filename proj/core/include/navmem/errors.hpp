#pragma once

#include <stdexcept>
#include <string>

namespace navmem {

// Base class for every error raised by the library. Each concrete type
// corresponds to one misuse or failure mode of a module contract.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct NonSquareTokenGrid : Error {
    using Error::Error;
};
struct IncompatibleScale : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct ShapeMismatch : Error {
    using Error::Error;
};
struct EmptyMemory : Error {
    using Error::Error;
};
struct EpisodeFinished : Error {
    using Error::Error;
};
struct GenerationFailed : Error {
    using Error::Error;
};
struct Unreachable : Error {
    using Error::Error;
};
struct DegenerateEpisode : Error {
    using Error::Error;
};
struct EmptyInput : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct SchemaMismatch : Error {
    using Error::Error;
};
struct MissingSlot : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};

} // namespace navmem
