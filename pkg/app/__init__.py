# app 패키지
