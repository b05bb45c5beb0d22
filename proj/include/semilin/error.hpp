/*
   Copyright 2026 The semilin Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

        http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#ifndef SEMILIN_ERROR_HPP
#define SEMILIN_ERROR_HPP

#include <stdexcept>
#include <string>

namespace semilin
{

/// Base class of every exception thrown by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
    /// Stable identifier used in JSON reports.
    virtual const char *kind() const noexcept { return "Error"; }
};

#define SEMILIN_DEFINE_ERROR(NAME)                                                                                     \
    class NAME : public error                                                                                          \
    {                                                                                                                  \
    public:                                                                                                            \
        using error::error;                                                                                            \
        const char *kind() const noexcept override { return #NAME; }                                                   \
    };

// scalar
SEMILIN_DEFINE_ERROR(DivisionByZero)
SEMILIN_DEFINE_ERROR(FieldMismatch)
SEMILIN_DEFINE_ERROR(OrderNotAvailable)
// series / matrices
SEMILIN_DEFINE_ERROR(IndistinguishableFromZero)
SEMILIN_DEFINE_ERROR(DimMismatch)
SEMILIN_DEFINE_ERROR(SingularWithinPrecision)
// local solver
SEMILIN_DEFINE_ERROR(NotIntegral)
SEMILIN_DEFINE_ERROR(SingularAtZero)
SEMILIN_DEFINE_ERROR(ContractionViolated)
SEMILIN_DEFINE_ERROR(NotACocycle)
SEMILIN_DEFINE_ERROR(CyclicSearchFailed)
SEMILIN_DEFINE_ERROR(DivisibilityViolated)
SEMILIN_DEFINE_ERROR(NotExtendable)
SEMILIN_DEFINE_ERROR(MissingCoprimePair)
SEMILIN_DEFINE_ERROR(FieldExtensionRequired)
SEMILIN_DEFINE_ERROR(PreconditionViolated)
// rational functions
SEMILIN_DEFINE_ERROR(SubstitutionPole)
SEMILIN_DEFINE_ERROR(DegenerateMap)
// serialization / parsing
SEMILIN_DEFINE_ERROR(ParseError)

#undef SEMILIN_DEFINE_ERROR

} // namespace semilin

#endif
