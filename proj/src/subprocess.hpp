#pragma once

#include <chrono>
#include <string>

#include <sys/types.h>

namespace signas {

/// Child process started through `/bin/sh -c` with its stdin and stdout
/// connected to a socket pair. stderr is inherited. The child runs in its own
/// process group; destruction closes its input and kills the group if it has
/// not exited shortly afterwards.
class Subprocess {
public:
    enum class ReadStatus { line, timeout, eof };

    explicit Subprocess(const std::string& command);
    ~Subprocess();

    Subprocess(const Subprocess&) = delete;
    Subprocess& operator=(const Subprocess&) = delete;

    /// Writes `line` plus LF. False when the child no longer reads.
    bool write_line(const std::string& line);

    /// Reads one LF-terminated line (terminator stripped).
    ReadStatus read_line(std::string& line, std::chrono::milliseconds timeout);

    pid_t pid() const noexcept { return pid_; }

private:
    pid_t pid_ = -1;
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace signas
