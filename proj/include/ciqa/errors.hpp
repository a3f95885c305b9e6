#pragma once

#include <stdexcept>
#include <string>

namespace ciqa {

// Error families map 1:1 onto CLI exit codes (see README).
enum class ErrorFamily {
    Internal = 1,
    Usage = 2,
    Io = 3,
    Data = 4,
    Precondition = 5,
    Version = 6,
};

class Error : public std::runtime_error {
public:
    Error(ErrorFamily family, const std::string& what)
        : std::runtime_error(what), family_(family) {}
    ErrorFamily family() const { return family_; }
    int exit_code() const { return static_cast<int>(family_); }

private:
    ErrorFamily family_;
};

#define CIQA_DEFINE_ERROR(NAME, FAMILY)                       \
    class NAME : public Error {                               \
    public:                                                   \
        explicit NAME(const std::string& what)                \
            : Error(ErrorFamily::FAMILY, #NAME ": " + what) {}\
    }

// image-io
CIQA_DEFINE_ERROR(DecodeError, Io);
CIQA_DEFINE_ERROR(TooSmall, Data);

// fdct
CIQA_DEFINE_ERROR(ShapeError, Data);
CIQA_DEFINE_ERROR(ConfigError, Data);
CIQA_DEFINE_ERROR(ScaleOutOfRange, Data);

// robust-stats / eval
CIQA_DEFINE_ERROR(EmptyInput, Data);
CIQA_DEFINE_ERROR(DegenerateScale, Precondition);
CIQA_DEFINE_ERROR(LengthMismatch, Data);
CIQA_DEFINE_ERROR(DegenerateVariance, Precondition);
CIQA_DEFINE_ERROR(InsufficientSamples, Precondition);
CIQA_DEFINE_ERROR(AllZeroDifferences, Precondition);
CIQA_DEFINE_ERROR(UnpairedRounds, Precondition);

// svm
CIQA_DEFINE_ERROR(SingleClass, Precondition);
CIQA_DEFINE_ERROR(NonFinite, Data);
CIQA_DEFINE_ERROR(UntrainedModel, Precondition);
CIQA_DEFINE_ERROR(DimensionMismatch, Data);

// two-stage
CIQA_DEFINE_ERROR(TooFewReferences, Precondition);
CIQA_DEFINE_ERROR(TooFewSamples, Precondition);
CIQA_DEFINE_ERROR(MissingClass, Precondition);

// datasets
CIQA_DEFINE_ERROR(SchemaError, Data);
CIQA_DEFINE_ERROR(MissingFile, Io);
CIQA_DEFINE_ERROR(ScoreOutOfRange, Data);
CIQA_DEFINE_ERROR(IoError, Io);

// serialization
CIQA_DEFINE_ERROR(VersionMismatch, Version);

#undef CIQA_DEFINE_ERROR

}  // namespace ciqa
