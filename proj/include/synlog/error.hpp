#pragma once

#include <stdexcept>
#include <string>

namespace synlog {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (counts, detector kinds, config files).
struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    IoError(const std::string& path, const std::string& cause)
        : Error(path + ": " + cause), path(path), cause(cause) {}
    std::string path;
    std::string cause;
};

}  // namespace synlog
