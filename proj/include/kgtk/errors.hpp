#pragma once

#include <stdexcept>
#include <string>

namespace kgtk {

// Exit-code classes: UsageError -> 1, DataError -> 2, IoFailure -> 3.
class KgtkError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UsageError : public KgtkError {
public:
    using KgtkError::KgtkError;
};

class DataError : public KgtkError {
public:
    using KgtkError::KgtkError;
};

class IoFailure : public KgtkError {
public:
    using KgtkError::KgtkError;
};

class MissingRequiredColumn : public DataError {
public:
    using DataError::DataError;
};

class DuplicateColumn : public DataError {
public:
    using DataError::DataError;
};

class AmbiguousAlias : public DataError {
public:
    using DataError::DataError;
};

class EmptyInput : public DataError {
public:
    using DataError::DataError;
};

class UnsortedInput : public DataError {
public:
    using DataError::DataError;
};

class AbortOnFirstError : public DataError {
public:
    using DataError::DataError;
};

class KeyArityMismatch : public UsageError {
public:
    using UsageError::UsageError;
};

class ProtectedColumn : public UsageError {
public:
    using UsageError::UsageError;
};

class UnknownColumn : public UsageError {
public:
    using UsageError::UsageError;
};

class PatternSyntax : public UsageError {
public:
    using UsageError::UsageError;
};

class UnknownSubcommand : public UsageError {
public:
    using UsageError::UsageError;
};

class EmptyStage : public UsageError {
public:
    using UsageError::UsageError;
};

class BadStageArgs : public UsageError {
public:
    using UsageError::UsageError;
};

class UnknownEncoder : public UsageError {
public:
    using UsageError::UsageError;
};

class EncoderFailure : public KgtkError {
public:
    using KgtkError::KgtkError;
};

class NonSymbolSubject : public DataError {
public:
    using DataError::DataError;
};

class UnexpandablePrefix : public DataError {
public:
    using DataError::DataError;
};

class MalformedTriple : public DataError {
public:
    using DataError::DataError;
};

class TempSpaceExhausted : public IoFailure {
public:
    using IoFailure::IoFailure;
};

class OutOfMemory : public IoFailure {
public:
    using IoFailure::IoFailure;
};

}  // namespace kgtk
