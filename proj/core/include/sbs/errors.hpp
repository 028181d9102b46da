#ifndef SBS_ERRORS_HPP
#define SBS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace sbs {

// Error categories map onto process exit codes in the CLI:
// rejection -> 1, bad_input -> 2, numeric -> 3.
enum class ErrorKind { bad_input, numeric, rejection };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error input_error(const std::string& msg) { return Error(ErrorKind::bad_input, msg); }
inline Error numeric_error(const std::string& msg) { return Error(ErrorKind::numeric, msg); }
inline Error rejection_error(const std::string& msg) { return Error(ErrorKind::rejection, msg); }

} // namespace sbs

#endif
