# parsers 패키지
