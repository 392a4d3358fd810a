# Parsers package: FCDSL constraints and ADSL architecture specifications
