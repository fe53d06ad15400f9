// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace audioqa {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// evidence-core
struct EmptyCaption : Error {
    EmptyCaption() : Error("caption is empty") {}
};
struct EmptyEvidence : Error {
    EmptyEvidence() : Error("evidence content is empty") {}
};
struct InvalidSource : Error {
    InvalidSource() : Error("InitialCaption may only appear at ordinal 0") {}
};

// model-backends
struct AuthError : Error {
    using Error::Error;
};
struct TransportError : Error {
    using Error::Error;
};
struct TransientError : Error {
    using Error::Error;
};
struct MalformedResponse : Error {
    using Error::Error;
};
struct AudioUnavailable : Error {
    using Error::Error;
};

// agents
struct PlanParseFailure : Error {
    using Error::Error;
};
struct InteractParseFailure : Error {
    using Error::Error;
};
struct CaptionFailure : Error {
    using Error::Error;
};

// eval-harness
struct DatasetError : Error {
    using Error::Error;
};
struct FileNotFound : DatasetError {
    explicit FileNotFound(const std::string& path) : DatasetError("file not found: " + path) {}
};
struct EmptyDataset : DatasetError {
    EmptyDataset() : DatasetError("dataset contains no valid samples") {}
};
struct DuplicateId : DatasetError {
    using DatasetError::DatasetError;
};
struct IdMismatch : DatasetError {
    using DatasetError::DatasetError;
};

} // namespace audioqa
