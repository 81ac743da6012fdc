#pragma once

#include "quis/ingest.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace quis {

struct ServiceOptions {
    // Profiles are loaded from and saved to `<dir>/<name>.json`; without a
    // directory they live in memory only.
    std::optional<std::filesystem::path> profile_dir;
    std::string host = "127.0.0.1";
    std::size_t worker_threads = 16;
    std::size_t parallelism = 1;  // per-request evaluation workers
};

// JSON API over an immutable dataset. Profiles are the only mutable state;
// writes are serialized, reads run concurrently.
class Service {
public:
    Service(std::shared_ptr<const Dataset> data, ServiceOptions options);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    // Returns the bound port (an ephemeral one for port 0) or -1.
    int bind(int port);
    // Blocks until stop().
    bool serve();
    // bind + serve on a background thread.
    int start(int port = 0);
    void stop();

    std::size_t profile_count() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace quis
