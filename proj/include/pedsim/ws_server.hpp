#ifndef PEDSIM_WS_SERVER_HPP_
#define PEDSIM_WS_SERVER_HPP_

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "pedsim/session.hpp"

namespace pedsim {

struct ServerOptions
{
  ExperimentConfig config;
  std::string bind{"127.0.0.1"};
  unsigned short port{8080};  // 0 picks a free port
  std::filesystem::path static_dir;
};

/// HTTP + websocket front end. GET /ws upgrades to a session; other GET
/// requests are answered from static_dir. All I/O runs on one thread, so each
/// Session is only touched by that thread.
class WsServer
{
public:
  explicit WsServer(ServerOptions options);
  ~WsServer();
  WsServer(const WsServer &) = delete;
  WsServer &operator=(const WsServer &) = delete;

  /// Port actually bound (useful with port 0).
  unsigned short port() const;
  /// Serves until stop() is called.
  void run();
  /// Thread-safe.
  void stop();

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Connects to ws://host:port/ws, joins with a logical clock, and replays the
/// timed inputs tick by tick. Returns the trace rebuilt from the Tick stream.
EpisodeTrace replay_client(const std::string &host, unsigned short port, ControllerKind controller,
                           std::vector<TimedInput> script);

}  // namespace pedsim

#endif  // PEDSIM_WS_SERVER_HPP_
