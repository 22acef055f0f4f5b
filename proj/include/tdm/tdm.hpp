#pragma once

#include "tdm/errors.hpp"
#include "tdm/grid.hpp"
#include "tdm/field_io.hpp"
#include "tdm/transport_law.hpp"
#include "tdm/regime.hpp"
#include "tdm/physics.hpp"
#include "tdm/model.hpp"
#include "tdm/scaling.hpp"
#include "tdm/profile.hpp"
#include "tdm/solver.hpp"
#include "tdm/homogenize.hpp"
#include "tdm/verify.hpp"
#include "tdm/config.hpp"
