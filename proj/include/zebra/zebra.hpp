#pragma once

#include "zebra/error.hpp"
#include "zebra/model.hpp"
#include "zebra/journey_format.hpp"
#include "zebra/ingest.hpp"
#include "zebra/geo.hpp"
#include "zebra/occupancy.hpp"
#include "zebra/federation.hpp"
#include "zebra/store.hpp"
#include "zebra/service.hpp"
#include "zebra/regulator.hpp"
