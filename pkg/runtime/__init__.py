# Runtime package: adaptation loop, generic rules and violation reports
