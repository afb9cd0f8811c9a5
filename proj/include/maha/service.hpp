#pragma once

#include <memory>
#include <string>
#include <thread>

#include "maha/engine.hpp"

namespace maha {

// HTTP front end over one engine snapshot. Handlers copy the current
// snapshot pointer, so a reload never mixes state within a request.
class Service {
public:
    explicit Service(std::shared_ptr<const EngineSnapshot> snapshot);
    ~Service();

    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Blocks serving on host:port.
    void listen(const std::string& host, int port);

    // Binds an ephemeral port and serves on a background thread; returns the
    // port. Used by tests and available to embedders.
    int start_background(const std::string& host);
    void stop();

    void swap_snapshot(std::shared_ptr<const EngineSnapshot> snapshot);
    std::shared_ptr<const EngineSnapshot> current_snapshot() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace maha
