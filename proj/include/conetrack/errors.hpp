#pragma once

#include <stdexcept>
#include <string>

namespace conetrack {

/// Base for every error this library reports.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NonFiniteState : public Error {
public:
    using Error::Error;
};

class MalformedTrack : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class CorruptFile : public Error {
public:
    using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

class EpisodeFinished : public Error {
public:
    using Error::Error;
};

class ExpertFailure : public Error {
public:
    using Error::Error;
};

class TrainingDiverged : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace conetrack
