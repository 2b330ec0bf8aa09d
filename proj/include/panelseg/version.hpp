#ifndef PANELSEG_VERSION_HPP
#define PANELSEG_VERSION_HPP

#define PANELSEG_VERSION "0.1.0"

#endif  // PANELSEG_VERSION_HPP
