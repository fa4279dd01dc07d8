#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>

#include "pcekit/blackbox.hpp"
#include "pcekit/error.hpp"

namespace pcekit {

namespace {

struct Fd {
    int fd = -1;
    Fd() = default;
    explicit Fd(int f) : fd(f) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }
    void reset() {
        if (fd >= 0) ::close(fd);
        fd = -1;
    }
};

void make_pipe(Fd& read_end, Fd& write_end) {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw ModelError(std::string("pipe failed: ") + std::strerror(errno));
    read_end.fd = fds[0];
    write_end.fd = fds[1];
}

} // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& working_dir,
                          const std::string& input, std::chrono::milliseconds timeout) {
    if (argv.empty() || argv.front().empty()) throw ModelError("external command is empty");
    static std::once_flag ignore_sigpipe;
    std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });

    Fd in_r, in_w, out_r, out_w, err_r, err_w;
    make_pipe(in_r, in_w);
    make_pipe(out_r, out_w);
    make_pipe(err_r, err_w);

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    const std::string dir = working_dir.string();

    const pid_t pid = ::fork();
    if (pid < 0) throw ModelError(std::string("fork failed: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(in_r.fd, STDIN_FILENO);
        ::dup2(out_w.fd, STDOUT_FILENO);
        ::dup2(err_w.fd, STDERR_FILENO);
        if (!dir.empty() && ::chdir(dir.c_str()) != 0) {
            const char msg[] = "cannot enter working directory\n";
            (void)!::write(STDERR_FILENO, msg, sizeof(msg) - 1);
            ::_exit(127);
        }
        ::execvp(args[0], args.data());
        const char msg[] = "cannot execute command\n";
        (void)!::write(STDERR_FILENO, msg, sizeof(msg) - 1);
        ::_exit(127);
    }
    in_r.reset();
    out_w.reset();
    err_w.reset();
    ::fcntl(in_w.fd, F_SETFL, O_NONBLOCK);
    if (input.empty()) in_w.reset();

    ProcessResult result;
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    std::size_t written = 0;
    char buf[65536];
    while (out_r.fd >= 0 || err_r.fd >= 0) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            ::kill(-pid, SIGKILL);
            ::kill(pid, SIGKILL);
            break;
        }
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
        pollfd fds[3];
        int count = 0;
        Fd* owners[3];
        for (Fd* f : {&out_r, &err_r, &in_w}) {
            if (f->fd < 0) continue;
            fds[count] = {f->fd, static_cast<short>(f == &in_w ? POLLOUT : POLLIN), 0};
            owners[count++] = f;
        }
        const int ready = ::poll(fds, count, static_cast<int>(std::min<long long>(left, 1000)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        for (int i = 0; i < count; ++i) {
            if (!fds[i].revents) continue;
            Fd* f = owners[i];
            if (f == &in_w) {
                const ssize_t n = ::write(f->fd, input.data() + written, input.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN) f->reset();  // reader went away
                if (written == input.size()) f->reset();
                continue;
            }
            const ssize_t n = ::read(f->fd, buf, sizeof(buf));
            if (n > 0) {
                (f == &out_r ? result.std_out : result.std_err).append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || errno != EAGAIN) {
                f->reset();
            }
        }
    }
    in_w.reset();
    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {
    }
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

} // namespace pcekit
