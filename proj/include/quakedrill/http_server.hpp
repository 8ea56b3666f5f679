#pragma once

#include <functional>
#include <memory>
#include <string>

#include "quakedrill/service.hpp"

namespace httplib {
class Server;
}

namespace quakedrill::service {

/// JSON-over-HTTP front end for a Service.
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// Binds the listening socket. Returns false when the address is taken.
    /// Port 0 picks a free port; see port().
    bool bind(const std::string& host, int port);
    int port() const { return port_; }

    /// Serves requests until stop() is called from another thread.
    void listen();
    void stop();

private:
    Service& service_;
    std::unique_ptr<httplib::Server> server_;
    int port_ = 0;
};

}  // namespace quakedrill::service
