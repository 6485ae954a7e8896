# utils 패키지
