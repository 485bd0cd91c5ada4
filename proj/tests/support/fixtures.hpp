#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vthing/td_parser.hpp"

#ifndef VTHING_SAMPLES_DIR
#error "VTHING_SAMPLES_DIR must point at samples/"
#endif

namespace vthing::testing {

inline std::string samples_path(const std::string& relative) { return std::string(VTHING_SAMPLES_DIR) + "/" + relative; }

inline std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string coffee_machine_text() { return read_text(samples_path("things/coffee-machine.td.json")); }
inline ThingDescription coffee_machine() { return parse_td(coffee_machine_text()); }

inline const std::vector<std::string>& corpus_files()
{
    static const std::vector<std::string> files = {
        samples_path("things/coffee-machine.td.json"),
        samples_path("things/lamp.td.json"),
        samples_path("things/weather-station.td.json"),
        samples_path("things/empty-thing.td.json"),
    };
    return files;
}

/// An unused local TCP port (bound to 0, then released).
inline int free_port()
{
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    addr.sin_port = 0;
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw std::runtime_error("bind failed");
    }
    socklen_t len = sizeof(addr);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
    int port = ntohs(addr.sin_port);
    ::close(fd);
    return port;
}

/// A child process with stdout/stderr redirected to a file.
class ChildProcess {
public:
    ChildProcess(const std::vector<std::string>& argv, const std::string& log_path)
    {
        pid_ = ::fork();
        if (pid_ == 0) {
            FILE* log = std::fopen(log_path.c_str(), "w");
            if (log) {
                ::dup2(fileno(log), STDOUT_FILENO);
                ::dup2(fileno(log), STDERR_FILENO);
            }
            std::vector<char*> args;
            for (const auto& a : argv)
                args.push_back(const_cast<char*>(a.c_str()));
            args.push_back(nullptr);
            ::execv(args[0], args.data());
            std::_Exit(127);
        }
    }
    ChildProcess(const ChildProcess&) = delete;
    ChildProcess& operator=(const ChildProcess&) = delete;
    ~ChildProcess()
    {
        if (pid_ > 0 && !exited_) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
    }

    /// Send SIGINT and return the exit status (-1 if it did not exit normally).
    int interrupt()
    {
        ::kill(pid_, SIGINT);
        return wait();
    }

    int wait()
    {
        int status = 0;
        ::waitpid(pid_, &status, 0);
        exited_ = true;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    /// Exit status if the process already ended.
    std::optional<int> poll()
    {
        int status = 0;
        if (::waitpid(pid_, &status, WNOHANG) == pid_) {
            exited_ = true;
            return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
        }
        return std::nullopt;
    }

private:
    pid_t pid_ = -1;
    bool exited_ = false;
};

/// Run a command to completion; returns exit status and captured output.
inline std::pair<int, std::string> run_command(const std::vector<std::string>& argv, const std::string& log_path)
{
    ChildProcess child(argv, log_path);
    int status = child.wait();
    return {status, read_text(log_path)};
}

} // namespace vthing::testing
