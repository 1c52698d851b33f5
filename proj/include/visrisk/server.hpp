#pragma once

#include <memory>
#include <mutex>
#include <string>

#include "visrisk/workspace.hpp"

namespace httplib {
class Server;
}

namespace visrisk {

/// HTTP/JSON front of a Workspace. Requests read a snapshot taken at entry,
/// so a concurrent publish() never yields a mixed view.
class ApiServer {
public:
    explicit ApiServer(std::shared_ptr<const Workspace> workspace);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    void publish(std::shared_ptr<const Workspace> workspace);
    std::shared_ptr<const Workspace> snapshot() const;

    /// Binds to `port` (0 picks a free port) and returns the bound port, or -1.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    bool listen_after_bind();
    void stop();

private:
    void install_routes();

    mutable std::mutex mutex_;
    std::shared_ptr<const Workspace> workspace_;
    std::unique_ptr<httplib::Server> http_;
};

}  // namespace visrisk
