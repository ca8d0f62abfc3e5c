// Copyright 2026 The nvo Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// WebSocket frame server: /session speaks the protocol in session.hpp,
// GET /healthz answers {"asset_id", "voxel_count"}.

#include "nvo/asset.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace nvo::service {

struct ServerOptions {
    std::string address = "127.0.0.1";
    /// 0 picks a free port; read it back with Server::port().
    unsigned short port = 8080;
    /// Render workers shared by all sessions; 0 = available parallelism.
    int render_workers = 0;
};

class Server {
public:
    Server(std::shared_ptr<const Asset> asset, std::string asset_id, const ServerOptions& options);
    /// Loads the asset first; any load failure propagates and no socket is opened.
    static std::unique_ptr<Server> from_file(const std::filesystem::path& asset_path, const ServerOptions& options);
    ~Server();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

    unsigned short port() const;
    const std::string& asset_id() const;

    /// Serves on the calling thread until stop() or SIGINT/SIGTERM when
    /// `handle_signals` is set.
    void run(bool handle_signals = false);
    /// Serves on a background thread.
    void start();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace nvo::service
