# components 패키지
