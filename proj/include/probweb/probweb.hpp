#pragma once

#include "probweb/error.hpp"
#include "probweb/expansion.hpp"
#include "probweb/harness.hpp"
#include "probweb/io.hpp"
#include "probweb/maxent.hpp"
#include "probweb/model.hpp"
#include "probweb/scoring.hpp"
#include "probweb/web.hpp"
