#pragma once

#include "treelens/ball_lens.hpp"
#include "treelens/errors.hpp"
#include "treelens/gallery.hpp"
#include "treelens/geodesic.hpp"
#include "treelens/hyperbolicity.hpp"
#include "treelens/io.hpp"
#include "treelens/lipschitz.hpp"
#include "treelens/metric_space.hpp"
#include "treelens/parallel.hpp"
#include "treelens/report.hpp"
#include "treelens/rng.hpp"
#include "treelens/version.hpp"
