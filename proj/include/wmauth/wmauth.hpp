#pragma once

#include "channel.hpp"
#include "config.hpp"
#include "error.hpp"
#include "harness.hpp"
#include "pmf.hpp"
#include "receiver.hpp"
#include "rng.hpp"
#include "security.hpp"
#include "watermark.hpp"
