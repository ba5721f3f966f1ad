#pragma once

#include <stdexcept>
#include <string>

namespace perfport {

// Base for everything this library throws.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A numeric argument is outside its stated domain (efficiency outside (0,1],
// non-positive runtime, non-positive arithmetic intensity, ...).
struct DomainError : Error {
    using Error::Error;
};

// Required platform or repository data is missing or inconsistent
// (unknown peaks, conflicting platform redefinition, unreadable store).
struct ConfigError : Error {
    using Error::Error;
};

// Malformed request: bad filter, unknown format, unknown subject.
struct UsageError : Error {
    using Error::Error;
};

// No eligible record for an (application, platform, workload, space) key.
struct BaselineNotFound : Error {
    using Error::Error;
};

// Ingest rejected: identical record already stored and no supersede flag.
struct DuplicateRecord : Error {
    DuplicateRecord(const std::string& msg, std::string existing_id)
        : Error(msg), existing_record_id(std::move(existing_id)) {}
    std::string existing_record_id;
};

}  // namespace perfport
