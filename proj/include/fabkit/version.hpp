#ifndef FABKIT_VERSION_HPP
#define FABKIT_VERSION_HPP

#define FABKIT_VERSION "0.1.0"

#endif
