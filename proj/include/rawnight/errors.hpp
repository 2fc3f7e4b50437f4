#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace rawnight {

// Every failure raised by the library derives from Error. kind() is a stable
// machine-readable tag used by the CLI diagnostics.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define RAWNIGHT_DEFINE_ERROR(Name, tag)                                       \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& message) : Error(tag, message) {}     \
    }

RAWNIGHT_DEFINE_ERROR(CalibrationError, "calibration");
RAWNIGHT_DEFINE_ERROR(ImageError, "image");
RAWNIGHT_DEFINE_ERROR(SpecError, "spec");
RAWNIGHT_DEFINE_ERROR(ConfigError, "config");
RAWNIGHT_DEFINE_ERROR(FitError, "fit");
RAWNIGHT_DEFINE_ERROR(GeometryError, "geometry");
RAWNIGHT_DEFINE_ERROR(PartitionError, "partition");
RAWNIGHT_DEFINE_ERROR(DomainError, "domain");
RAWNIGHT_DEFINE_ERROR(PairingError, "pairing");
RAWNIGHT_DEFINE_ERROR(JobError, "job");
RAWNIGHT_DEFINE_ERROR(InputError, "input");
RAWNIGHT_DEFINE_ERROR(ValidationError, "validation");

#undef RAWNIGHT_DEFINE_ERROR

// I/O failure; carries the byte offset where a container stopped making sense.
class IoError : public Error {
public:
    explicit IoError(const std::string& message,
                     std::optional<std::uint64_t> offset = std::nullopt)
        : Error("io", offset ? message + " (at byte offset " +
                                   std::to_string(*offset) + ")"
                             : message),
          offset_(offset) {}

    std::optional<std::uint64_t> offset() const noexcept { return offset_; }

private:
    std::optional<std::uint64_t> offset_;
};

}  // namespace rawnight
